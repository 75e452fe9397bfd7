"""
Cantor bundle
Series encoding of orbits, the bundle map on C^2, the metric d_s, finite-depth sections
and the locally-eventually-onto diagnostic
"""
import functools
import itertools
import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from corrdyn.errors import (
    DepthError,
    EmptyOrbitError,
    InvalidAnnulusError,
    ParameterError,
    ShortOrbitError,
)
from corrdyn.parallel import parallel_map
from corrdyn.schemas import (
    AnnulusBounds,
    BundleParams,
    BundlePoint,
    CorrespondenceParams,
    Cycle,
    Direction,
    OrbitSegment,
    SectionTable,
)
from corrdyn.services.correspondence import (
    branch_derivative,
    branch_image,
    branch_label,
    images,
    images_array,
    preimage_branch,
    preimages,
    preimages_array,
)
from corrdyn.services.cycles import compose

logger = logging.getLogger(__name__)

MAX_REFINE = 16
MIXING_POINT_CAP = 400_000
# nearest-branch decoding loses a factor 1/delta of precision per step
DECODE_DEPTH = 10


def _points2d(z: Iterable[complex]) -> np.ndarray:
    z = np.asarray(list(z) if not isinstance(z, np.ndarray) else z, dtype=complex).ravel()
    return np.column_stack([z.real, z.imag])


# --- parameters ---

def choose_bundle_params(params: CorrespondenceParams, working_annulus: AnnulusBounds) -> BundleParams:
    """
    r = 0.95 min(1/sqrt 2, 1/(4|c|)) and delta = min(1/8, r rho / 4).

    rho = 2 sin(pi / max(p, q)) R_c^(p/q) bounds from below the spacing of images
    and preimages over the annulus.
    """
    if not working_annulus.valid:
        raise InvalidAnnulusError(f"no trapping annulus at c={params.c}")
    limit = 1 / math.sqrt(2)
    if params.c != 0:
        limit = min(limit, 1 / (4 * abs(params.c)))
    r = 0.95 * limit
    rho = 2 * math.sin(math.pi / max(params.p, params.q)) * working_annulus.R_c ** params.beta_float
    delta = min(0.125, r * rho / 4)
    logger.debug("choose_bundle_params: r=%.6g delta=%.6g rho=%.6g", r, delta, rho)
    return BundleParams(r=r, delta=delta, separation=rho)


# --- orbits ---

def forward_orbit(params: CorrespondenceParams, z: complex, symbols: Sequence[int]) -> OrbitSegment:
    """Orbit of z along forward branch labels"""
    points, _ = compose(params, z, symbols)
    return OrbitSegment(points=points, symbols=list(symbols), direction=Direction.FORWARD)


def backward_orbit(params: CorrespondenceParams, z: complex, symbols: Sequence[int]) -> OrbitSegment:
    """Orbit of z along preimage labels"""
    points = [complex(z)]
    for j in symbols:
        points.append(preimage_branch(params, points[-1], j))
    return OrbitSegment(points=points, symbols=list(symbols), direction=Direction.BACKWARD)


def periodic_orbit(cycle: Cycle, steps: int, start: int = 0) -> OrbitSegment:
    """The cycle's stored points repeated for the given number of steps"""
    n = cycle.period
    points = [cycle.points[(start + i) % n] for i in range(steps + 1)]
    symbols = [cycle.symbols[(start + i) % n] for i in range(steps)]
    return OrbitSegment(points=points, symbols=symbols, direction=Direction.FORWARD)


# --- encoding ---

def series_value(bp: BundleParams, points: Sequence[complex]) -> complex:
    """r * sum_{n>=1} delta^(n-1) z_n over points z_0, z_1, ..."""
    z = np.asarray(points[1:], dtype=complex)
    weights = bp.delta ** np.arange(len(z))
    return complex(bp.r * np.sum(weights * z))


def bundle_point_from_orbit(bp: BundleParams, orbit: OrbitSegment, bound: Optional[float] = None) -> BundlePoint:
    """
    Encode an orbit as (z_0, r sum delta^(n-1) z_n).

    The tail bound is r delta^N M / (1 - delta) with M the largest recorded modulus
    unless a bound is supplied.
    """
    if orbit.length < 1:
        raise EmptyOrbitError("orbit has no steps to encode")
    modulus = bound if bound is not None else max(abs(z) for z in orbit.points)
    tail = bp.r * bp.delta ** orbit.length * modulus / (1 - bp.delta)
    return BundlePoint(
        base=orbit.base,
        orbit=orbit,
        series=series_value(bp, orbit.points),
        tail_bound=tail,
        direction=orbit.direction,
    )


def decode_series(
    params: CorrespondenceParams,
    bp: BundleParams,
    base: complex,
    series: complex,
    depth: int,
    direction: Direction = Direction.FORWARD,
) -> OrbitSegment:
    """
    Recover the orbit from a C^2 value by nearest-branch selection.

    s / r = z_1 + delta z_2 + ... so z_1 is the candidate nearest s / r; the
    remainder (s - r z_1) / delta encodes the shifted orbit.
    """
    if depth < 1:
        raise ParameterError("depth must be >= 1")
    points = [complex(base)]
    symbols: List[int] = []
    s = complex(series)
    for _ in range(depth):
        if direction == Direction.FORWARD:
            candidates = images(params, points[-1])
        else:
            candidates = preimages(params, points[-1])
        k = int(np.argmin([abs(v - s / bp.r) for v in candidates]))
        symbols.append(k)
        points.append(candidates[k])
        s = (s - bp.r * candidates[k]) / bp.delta
    return OrbitSegment(points=points, symbols=symbols, direction=direction)


def reencode(
    params: CorrespondenceParams,
    x: BundlePoint,
    bp_from: BundleParams,
    bp_to: BundleParams,
    depth: Optional[int] = None,
) -> BundlePoint:
    """Move a bundle point from the (r, delta) encoding to (r', delta')"""
    if depth is None:
        depth = min(x.orbit.length, DECODE_DEPTH)
    orbit = decode_series(params, bp_from, x.base, x.series, depth, x.direction)
    return bundle_point_from_orbit(bp_to, orbit)


# --- bundle map ---

def bundle_map(params: CorrespondenceParams, bp: BundleParams, x: BundlePoint) -> BundlePoint:
    """Shift along the recorded orbit: (z_1, r(z_2 + delta z_3 + ...))"""
    if x.orbit.length < 2:
        raise ShortOrbitError("bundle_map needs an orbit of length >= 2")
    return bundle_point_from_orbit(bp, x.orbit.shifted())


def bundle_map_c2(
    params: CorrespondenceParams,
    bp: BundleParams,
    z: complex,
    w: complex,
    k: int,
) -> Tuple[complex, complex]:
    """(z, w) -> (phi_k(z), (w - r phi_k(z)) / delta)"""
    phi = branch_image(params, z, k)
    return phi, (w - bp.r * phi) / bp.delta


def bundle_preimage(params: CorrespondenceParams, bp: BundleParams, x: BundlePoint, j: int) -> BundlePoint:
    """Inverse branch of the bundle map through the j-th preimage of the base"""
    if x.direction != Direction.FORWARD:
        raise ParameterError("bundle_preimage applies to forward-encoded points")
    zeta = preimage_branch(params, x.base, j)
    k = branch_label(params, zeta, x.base)
    orbit = OrbitSegment(
        points=[zeta, *x.orbit.points],
        symbols=[k, *x.orbit.symbols],
        direction=Direction.FORWARD,
    )
    return bundle_point_from_orbit(bp, orbit)


def bundle_jacobian(params: CorrespondenceParams, bp: BundleParams, x: BundlePoint, n: int) -> complex:
    """det Jac(f^n)(x) = delta^(-n) times the derivative of the composed branch"""
    if n > x.orbit.length:
        raise DepthError(f"orbit has {x.orbit.length} steps, need {n}")
    derivative = 1 + 0j
    pts = x.orbit.points
    for i in range(n):
        derivative *= branch_derivative(params, pts[i], pts[i + 1])
    return derivative / bp.delta ** n


# --- metric ---

def metric_ds(
    s: float,
    x: BundlePoint,
    y: BundlePoint,
    depth: int,
    escape_bound: float,
) -> Tuple[float, float]:
    """
    d_s(x, y) = sum_{n<depth} s^n |z_n - y_n| and the tail s^depth diam / (1 - s).

    diam is 2 * escape_bound, the diameter of the disk |z| <= s_c holding every orbit.
    """
    if escape_bound <= 0:
        raise ParameterError("escape_bound must be positive")
    if not 0 < s < 1:
        raise ParameterError("s must lie in (0, 1)")
    if x.direction != y.direction:
        raise ParameterError("bundle points have different directions")
    if len(x.orbit.points) < depth or len(y.orbit.points) < depth:
        raise DepthError(f"need {depth} orbit points on both sides")
    a = np.asarray(x.orbit.points[:depth], dtype=complex)
    b = np.asarray(y.orbit.points[:depth], dtype=complex)
    value = float(np.sum(s ** np.arange(depth) * np.abs(a - b)))
    tail = s ** depth * 2 * escape_bound / (1 - s)
    return value, tail


# --- sections ---

def _section(params: CorrespondenceParams, bp: BundleParams, base: Sequence[complex], word: Tuple[int, ...]) -> List[BundlePoint]:
    return [bundle_point_from_orbit(bp, forward_orbit(params, z, word)) for z in base]


def enumerate_sections(
    params: CorrespondenceParams,
    bp: BundleParams,
    base: Sequence[complex],
    depth: int,
    workers: int = 1,
) -> SectionTable:
    """
    Sections over a base sample for every word in {0..q-1}^depth.

    The table is separated when, over every base point, distinct words give series
    farther apart than twice the largest tail bound.
    """
    if depth < 1:
        raise ParameterError("depth must be >= 1")
    base = [complex(z) for z in base]
    if not base:
        raise ParameterError("base sample is empty")
    words = list(itertools.product(range(params.q), repeat=depth))
    built = parallel_map(functools.partial(_section, params, bp, base), words, workers=workers)
    sections = dict(zip(words, built))

    tails = max(pt.tail_bound for section in built for pt in section)
    min_sep = math.inf
    if len(words) > 1:
        series = np.array([[pt.series for pt in section] for section in built])
        for i in range(len(base)):
            min_sep = min(min_sep, float(pdist(_points2d(series[:, i])).min()))
    separated = min_sep > 2 * tails
    if not separated:
        logger.warning("enumerate_sections: sections overlap at depth %d (min separation %.3g)", depth, min_sep)
    return SectionTable(
        depth=depth,
        sections=sections,
        separated=separated,
        min_separation=min_sep,
        metadata={"separation_bound": bp.separation, "max_tail": tails, "words": len(words)},
    )


# --- mixing ---

def _branch_values(params: CorrespondenceParams, line: np.ndarray, direction: Direction) -> np.ndarray:
    if direction == Direction.FORWARD:
        return images_array(params, line)
    return preimages_array(params, line)


def _continued_branches(values: np.ndarray) -> np.ndarray:
    """Follow every branch along a polyline by nearest continuation; shape (n, branches)"""
    out = np.empty_like(values)
    out[0] = values[0]
    for i in range(1, len(values)):
        jumps = np.abs(out[i - 1][:, None] - values[i][None, :])
        out[i] = values[i][np.argmin(jumps, axis=1)]
    return out


def _refine(params: CorrespondenceParams, line: np.ndarray, direction: Direction, cell: float) -> np.ndarray:
    """Continued branch images of a polyline, subdivided until no branch moves more than cell per segment"""
    for _ in range(MAX_REFINE):
        branches = _continued_branches(_branch_values(params, line, direction))
        if len(line) < 2:
            return branches
        long = np.flatnonzero(np.abs(np.diff(branches, axis=0)).max(axis=1) > cell)
        if long.size == 0:
            return branches
        line = np.insert(line, long + 1, (line[long] + line[long + 1]) / 2)
    return _continued_branches(_branch_values(params, line, direction))


def _clip(branch: np.ndarray, tree: cKDTree, eps: float) -> List[np.ndarray]:
    """Runs of a polyline inside the eps-fattened sample"""
    distances, _ = tree.query(_points2d(branch), distance_upper_bound=eps)
    inside = np.concatenate([[0], np.isfinite(distances).astype(np.int8), [0]])
    edges = np.flatnonzero(np.diff(inside))
    return [branch[a:b] for a, b in zip(edges[::2], edges[1::2])]


def _thin(line: np.ndarray, spacing: float) -> np.ndarray:
    """Keep the endpoints and every point at least spacing from the last kept one"""
    if len(line) < 3:
        return line
    keep = [0]
    for i in range(1, len(line) - 1):
        if abs(line[i] - line[keep[-1]]) >= spacing:
            keep.append(i)
    keep.append(len(line) - 1)
    return line[keep]


def _drop_duplicates(lines: Sequence[np.ndarray], tol: float) -> List[np.ndarray]:
    """Drop polylines lying within tol of polylines already kept"""
    kept: List[np.ndarray] = []
    covered: Optional[np.ndarray] = None
    for line in lines:
        pts = _points2d(line)
        if covered is not None and cKDTree(covered).query(pts)[0].max() <= tol:
            continue
        kept.append(line)
        covered = pts if covered is None else np.vstack([covered, pts])
    return kept


def mixing_diagnostic(
    params: CorrespondenceParams,
    sample: Sequence[complex],
    arc: Sequence[complex],
    eps: float,
    max_n: int,
    direction: Direction = Direction.FORWARD,
) -> Optional[int]:
    """
    Least n <= max_n for which the n-th image set of arc is an eps-net of the sample.

    The arc is an ordered polyline and stays one: before each step every polyline is
    subdivided until each continued branch moves consecutive points by at most eps/4.
    Images are clipped to the eps-fattened sample, thinned to eps/8 spacing and
    near-duplicate polylines dropped. Returns None when no such n exists.
    """
    tree = cKDTree(_points2d(sample))
    target = tree.data
    cell = eps / 4
    lines = [np.asarray(list(arc), dtype=complex)]
    for n in range(max_n + 1):
        lines = [line for line in lines if line.size]
        if not lines:
            return None
        points = np.concatenate(lines)
        if points.size > MIXING_POINT_CAP:
            logger.warning("mixing_diagnostic: %d image points after %d steps, giving up", points.size, n)
            return None
        distances, _ = cKDTree(_points2d(points)).query(target)
        if distances.max() <= eps:
            logger.debug("mixing_diagnostic: eps-net after %d steps", n)
            return n
        if n == max_n:
            break
        stepped = []
        for line in lines:
            branches = _refine(params, line, direction, cell)
            for k in range(branches.shape[1]):
                stepped.extend(_thin(run, cell / 2) for run in _clip(branches[:, k], tree, eps))
        lines = _drop_duplicates(stepped, cell)
    return None
