"""
Solenoid at c = 0
Solid-torus iterated system u_k and the symbolic encoding g(t, tau) with angle maps theta_k
"""
import functools
import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree

from corrdyn.errors import CapExceededError, ParameterError, ShortSequenceError
from corrdyn.parallel import parallel_map
from corrdyn.schemas import BundleParams, BundlePoint, CorrespondenceParams, Direction, OrbitSegment, TorusPoint
from corrdyn.services.bundle import bundle_point_from_orbit
from corrdyn.services.correspondence import branch_label

logger = logging.getLogger(__name__)

TWO_PI = 2 * math.pi

C2Point = Tuple[complex, complex]


def theta(params: CorrespondenceParams, k: int, t: float) -> float:
    """p t / q + 2 pi k / q, not reduced"""
    return params.p * t / params.q + TWO_PI * k / params.q


# --- solid torus ---

def _check_fits(bp: BundleParams) -> None:
    if bp.r + bp.delta > 1:
        raise ParameterError(f"r + delta = {bp.r + bp.delta:.6g} > 1, images leave the solid torus")


def torus_map(bp: BundleParams, params: CorrespondenceParams, k: int, x: TorusPoint) -> TorusPoint:
    """u_k(e^{it}, z) = (exp i(q t / p + 2 k pi / p), delta z + r e^{it})"""
    _check_fits(bp)
    if not 0 <= k < params.p:
        raise ParameterError(f"torus map index {k} outside 0..{params.p - 1}")
    t = math.fmod(params.q * x.t / params.p + TWO_PI * k / params.p, TWO_PI)
    if t < 0:
        t += TWO_PI
    disk = bp.delta * x.disk + bp.r * complex(math.cos(x.t), math.sin(x.t))
    return TorusPoint(t=t, disk=disk)


def _iterate_point(bp: BundleParams, params: CorrespondenceParams, n: int, x: Tuple[float, complex]) -> Tuple[np.ndarray, np.ndarray]:
    t = np.array([x[0]])
    d = np.array([x[1]], dtype=complex)
    shifts = TWO_PI * np.arange(params.p) / params.p
    for _ in range(n):
        new_t = np.mod(params.q * t[:, None] / params.p + shifts[None, :], TWO_PI)
        new_d = bp.delta * d[:, None] + bp.r * np.exp(1j * t)[:, None]
        new_d = np.broadcast_to(new_d, new_t.shape)
        t, d = new_t.ravel(), new_d.ravel()
    return t, d


def torus_iterate_arrays(
    bp: BundleParams,
    params: CorrespondenceParams,
    cloud: Sequence[TorusPoint],
    n: int,
    cap: Optional[int] = None,
    workers: int = 1,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    n-fold union of images as (t, disk) arrays.

    Output order: by input point, then by the word k_1 ... k_n in lexicographic order.
    """
    _check_fits(bp)
    if n < 0:
        raise ParameterError("n must be >= 0")
    if cap is None:
        from corrdyn.config import settings
        cap = settings.torus_cap
    size = len(cloud) * params.p ** n
    if size > cap:
        raise CapExceededError(f"{len(cloud)} x {params.p}^{n} = {size} points exceeds the cap {cap}")
    seeds = [(x.t, x.disk) for x in cloud]
    parts = parallel_map(functools.partial(_iterate_point, bp, params, n), seeds, workers=workers)
    if not parts:
        return np.empty(0), np.empty(0, dtype=complex)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def torus_iterate(
    bp: BundleParams,
    params: CorrespondenceParams,
    cloud: Sequence[TorusPoint],
    n: int,
    cap: Optional[int] = None,
    workers: int = 1,
) -> List[TorusPoint]:
    """omega^n(cloud) as torus points"""
    t, d = torus_iterate_arrays(bp, params, cloud, n, cap=cap, workers=workers)
    return [TorusPoint(t=float(a), disk=complex(b)) for a, b in zip(t, d)]


# --- symbolic encoding ---

def symbolic_angles(params: CorrespondenceParams, t: float, tau: Sequence[int], n: int) -> List[Tuple[float, int]]:
    """
    Angles T_0..T_n of theta_{k_{j-1}} o ... o theta_{k_0}(t).

    Each T_j is returned as (a_j, m_j) with T_j = a_j + 2 pi q m_j, a_j in [0, 2 pi q)
    and m_j an exact integer, so reduced angles stay accurate at any depth.
    """
    p, q = params.p, params.q
    period = TWO_PI * q
    m, a = divmod(t, period)
    out = [(a, int(m))]
    offset = int(m)
    for k in tau[:n]:
        b = (p * offset) % q
        v = p * a / q + TWO_PI * k / q + TWO_PI * b
        e = math.floor(v / period)
        a = v - period * e
        if a >= period:
            a -= period
            e += 1
        offset = (p * offset - b) // q + e
        out.append((a, offset))
    return out


def _check_address(params: CorrespondenceParams, tau: Sequence[int], n: int) -> None:
    if len(tau) < n:
        raise ShortSequenceError(f"address has {len(tau)} symbols, need {n}")
    bad = [k for k in tau[:n] if not 0 <= k < params.q]
    if bad:
        raise ParameterError(f"address symbols {bad} outside 0..{params.q - 1}")


def symbolic_point(bp: BundleParams, params: CorrespondenceParams, t: float, tau: Sequence[int], n: int) -> BundlePoint:
    """g(t, tau) truncated at n terms, as a bundle point over e^{it}"""
    if params.c != 0:
        raise ParameterError("the symbolic solenoid lives at c = 0")
    _check_address(params, tau, n)
    angles = symbolic_angles(params, t, tau, n)
    points = [complex(math.cos(a), math.sin(a)) for a, _ in angles]
    points[0] = complex(math.cos(t), math.sin(t))
    labels = [branch_label(params, points[i], points[i + 1]) for i in range(n)]
    orbit = OrbitSegment(points=points, symbols=labels, direction=Direction.FORWARD)
    return bundle_point_from_orbit(bp, orbit, bound=1.0)


def deck_transform(params: CorrespondenceParams, tau: Sequence[int], turns: int) -> List[int]:
    """tau' with g(t + 2 pi turns, tau') = g(t, tau)"""
    p, q = params.p, params.q
    offset = turns
    out = []
    for k in tau:
        k_new = (k - p * offset) % q
        offset = (p * offset + k_new - k) // q
        out.append(k_new)
    return out


def symbolic_to_torus(bp: BundleParams, params: CorrespondenceParams, t: float, tau: Sequence[int], n: int) -> TorusPoint:
    """
    Realise g(t, tau) as an element of omega^n(T).

    Starts from (T_n mod 2 pi, 0) and applies the torus maps whose angles retrace the
    orbit backwards; the result differs from symbolic_point by at most its tail.
    """
    _check_fits(bp)
    _check_address(params, tau, n)
    p, q = params.p, params.q
    angles = symbolic_angles(params, t, tau, n)
    x = TorusPoint(t=math.fmod(angles[n][0], TWO_PI), disk=0j)
    for i in range(n, 0, -1):
        previous = angles[i - 1][0]
        j = round(p * (previous - q * x.t / p) / TWO_PI) % p
        x = torus_map(bp, params, j, x)
    return TorusPoint(t=math.fmod(t, TWO_PI) % TWO_PI, disk=x.disk)


def quotient_equal(a: Union[C2Point, BundlePoint], b: Union[C2Point, BundlePoint], tol: float) -> bool:
    """Componentwise |a - b| <= tol in C^2"""
    a = a.c2 if isinstance(a, BundlePoint) else a
    b = b.c2 if isinstance(b, BundlePoint) else b
    return abs(a[0] - b[0]) <= tol and abs(a[1] - b[1]) <= tol


def embed(t: np.ndarray, disk: np.ndarray) -> np.ndarray:
    """(e^{it}, disk) as rows of (z_re, z_im, w_re, w_im)"""
    t = np.asarray(t, dtype=float)
    disk = np.asarray(disk, dtype=complex)
    return np.column_stack([np.cos(t), np.sin(t), disk.real, disk.imag])


def nearest_distance(cloud_t: np.ndarray, cloud_disk: np.ndarray, points: Sequence[C2Point]) -> np.ndarray:
    """Distance in C^2 from each point to the nearest cloud element"""
    tree = cKDTree(embed(cloud_t, cloud_disk))
    query = np.array([[z.real, z.imag, w.real, w.imag] for z, w in points])
    distances, _ = tree.query(query)
    return distances


def random_addresses(params: CorrespondenceParams, count: int, n: int, seed: int) -> List[Tuple[float, List[int]]]:
    """Reproducible (t, tau) pairs with t uniform on [0, 2 pi)"""
    rng = np.random.Generator(np.random.PCG64(seed))
    ts = rng.uniform(0.0, TWO_PI, size=count)
    words = rng.integers(0, params.q, size=(count, n))
    return [(float(t), [int(k) for k in word]) for t, word in zip(ts, words)]
