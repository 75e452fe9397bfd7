"""
Holomorphic motions by shadowing
A backward contraction sweep moves orbits from one parameter to another; bundle points,
plane points and solenoid leaves are moved through it. Diagnostics measure holomorphy,
Lipschitz constants, dilatation and injectivity of the results.
"""
import functools
import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from corrdyn.errors import (
    AmbiguousBranchError,
    InsufficientSamplesError,
    ParameterError,
    ShadowEscapeError,
    ShortOrbitError,
)
from corrdyn.parallel import parallel_map
from corrdyn.schemas import (
    BundleParams,
    BundlePoint,
    CorrespondenceParams,
    CurveSample,
    Direction,
    MotionConfig,
    OrbitSegment,
)
from corrdyn.services.bundle import bundle_map, bundle_point_from_orbit, forward_orbit
from corrdyn.services.correspondence import (
    annulus_bounds,
    branch_label,
    estimate_expansion,
    images,
    preimage_label,
    preimages,
)
from corrdyn.services.cycles import hausdorff
from corrdyn.services.solenoid import symbolic_point

logger = logging.getLogger(__name__)

TIE_TOL = 1e-12
DEDUP_TOL = 1e-10
FATTEN = 0.05


def _buffer(buffer: Optional[int]) -> int:
    if buffer is None:
        from corrdyn.config import settings
        return settings.shadow_buffer
    return buffer


def _same_family(u: CorrespondenceParams, v: CorrespondenceParams) -> None:
    if (u.p, u.q) != (v.p, v.q):
        raise ParameterError("motions only vary c")


# --- constants ---

def separation(params: CorrespondenceParams, samples: Iterable[complex]) -> float:
    """Smallest spacing between distinct images, or between distinct preimages, of a sample"""
    best = math.inf
    for z in samples:
        for group in (images(params, z), preimages(params, z)):
            for i in range(len(group)):
                for j in range(i + 1, len(group)):
                    best = min(best, abs(group[i] - group[j]))
    return best


def _forward_max(params: CorrespondenceParams, samples: Sequence[complex]) -> float:
    """Largest forward-branch derivative beta |z|^(beta - 1) over the samples"""
    z = np.abs(np.asarray(samples, dtype=complex))
    return float(np.max(params.beta_float * z ** (params.beta_float - 1)))


def estimate_motion_config(
    params: CorrespondenceParams,
    samples: Sequence[complex],
    ell: float = 1.0,
    eps: Optional[float] = None,
    direction: Direction = Direction.FORWARD,
) -> MotionConfig:
    """
    Measure lam, eps and the certified domain radius on a working set.

    lam is the largest derivative of the branches the shadow sweep applies, over the set
    fattened radially by 5%: inverse branches for forward orbits of repellers, forward
    branches for backward orbits of attractors. eps = min(0.1, separation / (10 ell))
    unless given.
    """
    samples = [complex(z) for z in samples]
    fattened = [z * s for z in samples for s in (1 - FATTEN, 1.0, 1 + FATTEN)]
    if direction == Direction.FORWARD:
        lam = estimate_expansion(params, fattened, radius=1e-6).backward_max
    else:
        lam = _forward_max(params, fattened)
    if lam >= 1:
        raise ParameterError(f"the sweep branches do not contract (lam={lam:.4g})")
    sep = separation(params, samples)
    if eps is None:
        eps = min(0.1, sep / (10 * ell))
    cfg = MotionConfig(eps=eps, lam=lam, ell=ell, u_radius=eps * (1 - lam) / (6 * ell), separation=sep)
    logger.info(
        "estimate_motion_config: eps=%.6g lam=%.6g C0=%.6g U=%.6g sep=%.6g",
        cfg.eps, cfg.lam, cfg.c0, cfg.u_radius, sep,
    )
    return cfg


def circle_samples(count: int = 64) -> List[complex]:
    """Evenly spaced points on the unit circle"""
    return [complex(math.cos(2 * math.pi * j / count), math.sin(2 * math.pi * j / count)) for j in range(count)]


# --- shadowing ---

def _nearest(candidates: Sequence[complex], target: complex) -> complex:
    distances = np.abs(np.asarray(candidates) - target)
    order = np.argsort(distances, kind="stable")
    if len(order) > 1 and distances[order[1]] - distances[order[0]] < TIE_TOL:
        raise AmbiguousBranchError(f"two branches equidistant from {target}")
    return candidates[order[0]]


def shadow_orbit(
    params_u: CorrespondenceParams,
    params_v: CorrespondenceParams,
    orbit_u: OrbitSegment,
    cfg: MotionConfig,
) -> OrbitSegment:
    """
    The params_v orbit that stays eps-close to orbit_u.

    Seeds w_N = z_N and sweeps back: w_{i-1} is the preimage of w_i under params_v
    nearest to z_{i-1} (nearest image for backward-direction orbits). Entry i carries
    the bound lam^(N-i) ell |c_u - c_v| / (1 - lam).
    """
    _same_family(params_u, params_v)
    if params_u.c == params_v.c:
        return orbit_u

    dc = abs(params_v.c - params_u.c)
    if dc >= cfg.u_radius:
        logger.warning(
            "shadow_orbit: |dc|=%.4g outside the certified radius %.4g, result uncertified", dc, cfg.u_radius
        )
    z = orbit_u.points
    n = len(z) - 1
    w = [0j] * (n + 1)
    w[n] = z[n]
    for i in range(n, 0, -1):
        if orbit_u.direction == Direction.FORWARD:
            candidates = preimages(params_v, w[i])
        else:
            candidates = images(params_v, w[i])
        w[i - 1] = _nearest(candidates, z[i - 1])
        drift = abs(w[i - 1] - z[i - 1])
        if drift >= cfg.eps:
            raise ShadowEscapeError(f"shadow drifted {drift:.4g} >= eps={cfg.eps} at step {i - 1}")

    if orbit_u.direction == Direction.FORWARD:
        symbols = [branch_label(params_v, w[i], w[i + 1]) for i in range(n)]
    else:
        symbols = [preimage_label(params_v, w[i], w[i + 1]) for i in range(n)]
    scale = cfg.ell * dc / (1 - cfg.lam)
    bounds = [cfg.lam ** (n - i) * scale for i in range(n + 1)]
    return OrbitSegment(points=w, symbols=symbols, direction=orbit_u.direction, error_bounds=bounds)


def _encode_shadow(bp: BundleParams, shadow: OrbitSegment, n: int) -> BundlePoint:
    """Truncate a shadow to n steps and fold its error bounds into the tail"""
    truncated = shadow.truncated(n)
    encoded = bundle_point_from_orbit(bp, truncated)
    if truncated.error_bounds is None:
        return encoded
    errors = np.asarray(truncated.error_bounds[1:])
    shadow_error = bp.r * float(np.sum(bp.delta ** np.arange(len(errors)) * errors))
    return encoded.model_copy(update={"tail_bound": encoded.tail_bound + shadow_error})


def motion_point(
    params_base: CorrespondenceParams,
    params_target: CorrespondenceParams,
    bp: BundleParams,
    x: BundlePoint,
    cfg: MotionConfig,
    n: int,
    buffer: Optional[int] = None,
) -> BundlePoint:
    """
    h_c(x): shadow the recorded orbit and re-encode the first n steps.

    The tail bound of the result adds the shadow error bounds to the series tail.
    """
    _same_family(params_base, params_target)
    if params_target.c == params_base.c:
        return x
    buffer = _buffer(buffer)
    if x.orbit.length < n + buffer:
        raise ShortOrbitError(f"orbit has {x.orbit.length} steps, need {n} + buffer {buffer}")
    shadow = shadow_orbit(params_base, params_target, x.orbit, cfg)
    return _encode_shadow(bp, shadow, n)


def conjugacy_defect(
    params_base: CorrespondenceParams,
    params_target: CorrespondenceParams,
    bp: BundleParams,
    x: BundlePoint,
    cfg: MotionConfig,
    n: int,
    buffer: Optional[int] = None,
) -> float:
    """max componentwise |h_c(f_c0(x)) - f_c(h_c(x))|"""
    buffer = _buffer(buffer)
    if x.orbit.length < n + buffer + 1:
        raise ShortOrbitError(f"orbit has {x.orbit.length} steps, need {n + buffer + 1}")
    left = motion_point(params_base, params_target, bp, bundle_map(params_base, bp, x), cfg, n, buffer)
    shadow = shadow_orbit(params_base, params_target, x.orbit, cfg)
    right = bundle_map(params_target, bp, bundle_point_from_orbit(bp, shadow.truncated(n + 1)))
    return max(abs(left.base - right.base), abs(left.series - right.series))


def roundtrip_error(
    params_base: CorrespondenceParams,
    params_target: CorrespondenceParams,
    x: BundlePoint,
    cfg: MotionConfig,
    n: int,
) -> float:
    """Largest |z_i - z''_i| over the first n entries after shadowing there and back"""
    there = shadow_orbit(params_base, params_target, x.orbit, cfg)
    back = shadow_orbit(params_target, params_base, there, cfg)
    return max(abs(a - b) for a, b in zip(x.orbit.points[:n + 1], back.points[:n + 1]))


def lipschitz_estimate(
    params_base: CorrespondenceParams,
    c_values: Sequence[complex],
    bp: BundleParams,
    x: BundlePoint,
    cfg: MotionConfig,
    n: int,
    buffer: Optional[int] = None,
) -> float:
    """sup |pi h_u(x) - pi h_v(x)| / |u - v| over pairs of parameters"""
    moved = [
        motion_point(params_base, params_base.with_c(c), bp, x, cfg, n, buffer).base for c in c_values
    ]
    best = 0.0
    for i in range(len(c_values)):
        for j in range(i + 1, len(c_values)):
            du = abs(c_values[i] - c_values[j])
            if du > 0:
                best = max(best, abs(moved[i] - moved[j]) / du)
    return best


def hausdorff_distance(
    params_base: CorrespondenceParams,
    params_target: CorrespondenceParams,
    bp: BundleParams,
    points: Sequence[BundlePoint],
    cfg: MotionConfig,
    n: int,
    buffer: Optional[int] = None,
) -> float:
    """Hausdorff distance between the projections of points and of their motions; at most C0 |dc|"""
    moved = [motion_point(params_base, params_target, bp, x, cfg, n, buffer).base for x in points]
    return hausdorff([x.base for x in points], moved)


def sector_width(points: Sequence[complex], center: complex = 0j) -> float:
    """Angle of the smallest sector at center containing every point"""
    angles = np.sort(np.mod(np.angle(np.asarray(points, dtype=complex) - center), 2 * math.pi))
    if len(angles) < 2:
        return 0.0
    gaps = np.diff(np.concatenate([angles, [angles[0] + 2 * math.pi]]))
    return float(2 * math.pi - gaps.max())


# --- plane and curve motions ---

def lift_point(
    params_base: CorrespondenceParams,
    bp: BundleParams,
    z: complex,
    word: Sequence[int],
    length: int,
) -> BundlePoint:
    """
    Bundle point over z with the given forward address, extended by zeros.

    On the unit circle at c = 0 the address is read through the angle maps, which keeps
    long orbits exact; elsewhere it is a word of principal branch labels.
    """
    padded = list(word[:length]) + [0] * max(0, length - len(word))
    if params_base.c == 0 and abs(abs(z) - 1) < 1e-12:
        return symbolic_point(bp, params_base, math.atan2(z.imag, z.real), padded, length)
    return bundle_point_from_orbit(bp, forward_orbit(params_base, z, padded))


def branched_motion(
    params_base: CorrespondenceParams,
    params_target: CorrespondenceParams,
    bp: BundleParams,
    z: complex,
    words: Iterable[Sequence[int]],
    cfg: MotionConfig,
    n: int,
    buffer: Optional[int] = None,
) -> List[complex]:
    """Plane images of z under the motions of its lifts, deduplicated to 1e-10"""
    if params_target.c == params_base.c:
        return [complex(z)]
    buffer = _buffer(buffer)
    out: List[complex] = []
    for word in words:
        x = lift_point(params_base, bp, z, word, n + buffer)
        w = motion_point(params_base, params_target, bp, x, cfg, n, buffer).base
        if all(abs(w - v) >= DEDUP_TOL for v in out):
            out.append(w)
    return out


def _curve_point(
    params_base: CorrespondenceParams,
    params_target: CorrespondenceParams,
    bp: BundleParams,
    tau: List[int],
    cfg: MotionConfig,
    n: int,
    buffer: int,
    t: float,
) -> complex:
    if params_target.c == 0:
        return complex(math.cos(t), math.sin(t))
    x = symbolic_point(bp, params_base, t, tau, n + buffer)
    return motion_point(params_base, params_target, bp, x, cfg, n, buffer).base


def curve_sample(
    params_target: CorrespondenceParams,
    bp: BundleParams,
    tau: Sequence[int],
    t_range: Tuple[float, float],
    m: int,
    cfg: MotionConfig,
    n: int,
    buffer: Optional[int] = None,
    workers: int = 1,
) -> CurveSample:
    """
    gamma^tau_c(t) = pi h_c(g(t, tau)) on an m-point uniform grid.

    The base parameter is c = 0, where the curve is e^{it}.
    """
    if m < 2:
        raise ParameterError("need at least 2 curve samples")
    buffer = _buffer(buffer)
    params_base = params_target.with_c(0)
    padded = list(tau) + [0] * max(0, n + buffer - len(tau))
    ts = np.linspace(t_range[0], t_range[1], m)
    worker = functools.partial(_curve_point, params_base, params_target, bp, padded, cfg, n, buffer)
    zs = parallel_map(worker, [float(t) for t in ts], workers=workers, chunksize=16)

    bounds = annulus_bounds(params_target)
    contained = True
    if bounds.valid:
        moduli = np.abs(zs)
        contained = bool(np.all((moduli >= bounds.R_c - cfg.eps) & (moduli <= bounds.s_c + cfg.eps)))
        if not contained:
            logger.warning("curve_sample: samples leave the eps-fattened annulus at c=%s", params_target.c)
    metadata: Dict[str, object] = {
        "eps": cfg.eps,
        "lambda": cfg.lam,
        "C0": cfg.c0,
        "certified": abs(params_target.c) < cfg.u_radius,
        "contained": contained,
        "sector_width": sector_width(zs),
    }
    return CurveSample(
        tau=list(tau),
        c=params_target.c,
        samples=[(float(t), complex(z)) for t, z in zip(ts, zs)],
        truncation=n,
        metadata=metadata,
    )


# --- diagnostics ---

def holomorphy_residual(
    params_base: CorrespondenceParams,
    bp: BundleParams,
    x: BundlePoint,
    c_grid: Iterable[complex],
    cfg: MotionConfig,
    n: int,
    h_step: float = 1e-3,
    buffer: Optional[int] = None,
) -> float:
    """
    Largest |d h / d c-bar| of c -> h_c(x) over cross stencils centred on c_grid.

    Uses the rotation average (1 / 4h) sum_k h(c + h i^k) i^k, which is O(h^2) for
    holomorphic motions.
    """
    rotations = (1, 1j, -1, -1j)
    worst = 0.0
    for center in c_grid:
        acc_base = 0j
        acc_series = 0j
        for unit in rotations:
            moved = motion_point(params_base, params_base.with_c(center + h_step * unit), bp, x, cfg, n, buffer)
            acc_base += moved.base * unit
            acc_series += moved.series * unit
        worst = max(worst, abs(acc_base) / (4 * h_step), abs(acc_series) / (4 * h_step))
    return worst


def dilatation_estimate(samples: Sequence[Tuple[complex, complex]], scales: Sequence[float]) -> float:
    """
    Finite-scale dilatation of the sampled map domain -> image.

    For each domain point and scale, the ratio of the largest to the smallest stretch
    |image difference| / |domain difference| over neighbours at distance within
    [0.9, 1.1] times the scale; the min over scales, then the max over points.
    """
    domain = np.asarray([d for d, _ in samples], dtype=complex)
    image = np.asarray([i for _, i in samples], dtype=complex)
    tree = cKDTree(np.column_stack([domain.real, domain.imag]))
    per_point = np.full(len(domain), np.inf)
    for scale in scales:
        neighbours = tree.query_ball_point(np.column_stack([domain.real, domain.imag]), r=1.1 * scale)
        for i, group in enumerate(neighbours):
            js = np.asarray([j for j in group if j != i], dtype=int)
            if js.size == 0:
                continue
            dist = np.abs(domain[js] - domain[i])
            js = js[dist >= 0.9 * scale]
            if js.size < 2:
                continue
            stretch = np.abs(image[js] - image[i]) / np.abs(domain[js] - domain[i])
            if stretch.min() == 0:
                continue
            per_point[i] = min(per_point[i], float(stretch.max() / stretch.min()))
    finite = per_point[np.isfinite(per_point)]
    if finite.size == 0:
        raise InsufficientSamplesError("no sample has two neighbours at any scale")
    return float(finite.max())


def curve_dilatation(curve: CurveSample, steps: Sequence[int] = (1, 2, 4)) -> float:
    """dilatation_estimate of t -> gamma(t) at multiples of the grid step"""
    t = curve.t
    step = (t[-1] - t[0]) / (len(t) - 1)
    pairs = [(complex(a, 0.0), z) for a, z in zip(t, curve.z)]
    return dilatation_estimate(pairs, [k * step for k in steps])


def injectivity_check(curve: CurveSample, tol: float) -> bool:
    """False iff two samples further apart than one grid step in t are closer than tol"""
    t = curve.t
    z = curve.z
    if len(t) < 2:
        raise ParameterError("need at least 2 samples")
    step = float(np.max(np.diff(t)))
    tree = cKDTree(np.column_stack([z.real, z.imag]))
    for i, j in tree.query_pairs(tol):
        if abs(t[i] - t[j]) > step * (1 + 1e-9):
            return False
    return True
