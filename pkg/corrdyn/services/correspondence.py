"""
Correspondence arithmetic
Images, preimages and indexed branches of (w - c)^q = z^p, plus the trapping radii of the annulus
"""
import cmath
import logging
import math
from typing import Iterable, List

import numpy as np
from scipy import optimize

from corrdyn.errors import BranchPointError, DegenerateSampleError, InvalidPairError
from corrdyn.schemas import AnnulusBounds, CorrespondenceParams, ExpansionEstimate

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10
ROOT_XTOL = 1e-12
SCAN_POINTS = 1024
# log of the largest finite double
_MAX_LOG = 709.78


def _unit_root(k: int, n: int) -> complex:
    """exp(2 pi i k / n) with quarter turns snapped to exact values"""
    k %= n
    if (4 * k) % n == 0:
        return (1, 1j, -1, -1j)[(4 * k) // n]
    return cmath.exp(2j * math.pi * k / n)


def _principal_power(u: complex, num: int, den: int) -> complex:
    """exp((num/den) * Log u) with an overflow guard; u != 0"""
    if den == 1 or num % den == 0:
        m = num // den
        if m * math.log(abs(u)) > _MAX_LOG:
            raise OverflowError(f"|{u}|^{m} exceeds the floating range")
        return u ** m
    exponent = num / den
    log_mod = math.log(abs(u))
    if exponent * log_mod > _MAX_LOG:
        raise OverflowError(f"|{u}|^{exponent} exceeds the floating range")
    return cmath.exp(exponent * complex(log_mod, cmath.phase(u)))


def residual(params: CorrespondenceParams, z: complex, w: complex) -> float:
    """|(w - c)^q - z^p|"""
    return abs((w - params.c) ** params.q - z ** params.p)


def satisfies(params: CorrespondenceParams, z: complex, w: complex) -> bool:
    """Scale-aware residual check: 1e-10 * max(1, |z|^p)"""
    return residual(params, z, w) <= RESIDUAL_TOL * max(1.0, abs(z) ** params.p)


def branch_image(params: CorrespondenceParams, z: complex, k: int) -> complex:
    """
    k-th image of z, k in 0..q-1.

    w_k = c + exp((p/q)(ln|z| + i Arg z) + 2 pi i k / q) with Arg in (-pi, pi].
    """
    if not 0 <= k < params.q:
        raise ValueError(f"branch index {k} outside 0..{params.q - 1}")
    if z == 0:
        if params.integer_beta:
            return complex(params.c)
        raise BranchPointError("z = 0 is a branch point for non-integer p/q")
    if not cmath.isfinite(z):
        raise OverflowError(f"non-finite argument {z}")
    return params.c + _principal_power(complex(z), params.p, params.q) * _unit_root(k, params.q)


def images(params: CorrespondenceParams, z: complex) -> List[complex]:
    """All q images of z ordered by branch index"""
    if z == 0 and params.integer_beta:
        return [complex(params.c)]
    return [branch_image(params, z, k) for k in range(params.q)]


def preimage_branch(params: CorrespondenceParams, w: complex, j: int) -> complex:
    """j-th root of zeta^p = (w - c)^q, j in 0..p-1"""
    if not 0 <= j < params.p:
        raise ValueError(f"preimage index {j} outside 0..{params.p - 1}")
    u = complex(w) - params.c
    if u == 0:
        raise BranchPointError("w = c is a branch point of the inverse")
    if not cmath.isfinite(u):
        raise OverflowError(f"non-finite argument {w}")
    return _principal_power(u, params.q, params.p) * _unit_root(j, params.p)


def preimages(params: CorrespondenceParams, w: complex) -> List[complex]:
    """All p preimages of w ordered by index"""
    return [preimage_branch(params, w, j) for j in range(params.p)]


def images_array(params: CorrespondenceParams, z: np.ndarray) -> np.ndarray:
    """Vectorised images: shape z.shape + (q,)"""
    z = np.asarray(z, dtype=complex)
    zero = z == 0
    if zero.any() and not params.integer_beta:
        raise BranchPointError("z = 0 is a branch point for non-integer p/q")
    roots = np.array([_unit_root(k, params.q) for k in range(params.q)])
    with np.errstate(divide="ignore", invalid="ignore"):
        log_z = np.log(np.abs(z)) + 1j * np.angle(z)
        if np.any(params.beta_float * log_z.real[~zero] > _MAX_LOG):
            raise OverflowError("image modulus exceeds the floating range")
        lifted = np.where(zero, 0, np.exp(params.beta_float * log_z))
    return params.c + lifted[..., None] * roots


def preimages_array(params: CorrespondenceParams, w: np.ndarray) -> np.ndarray:
    """Vectorised preimages: shape w.shape + (p,)"""
    u = np.asarray(w, dtype=complex) - params.c
    if np.any(u == 0):
        raise BranchPointError("w = c is a branch point of the inverse")
    roots = np.array([_unit_root(j, params.p) for j in range(params.p)])
    lifted = np.exp((params.q / params.p) * (np.log(np.abs(u)) + 1j * np.angle(u)))
    return lifted[..., None] * roots


def branch_label(params: CorrespondenceParams, z: complex, w: complex) -> int:
    """Index k with branch_image(z, k) nearest to w"""
    if not satisfies(params, z, w):
        raise InvalidPairError(f"({z}, {w}) does not satisfy the correspondence")
    candidates = images(params, z)
    if len(candidates) == 1:
        return 0
    return int(np.argmin([abs(v - w) for v in candidates]))


def preimage_label(params: CorrespondenceParams, w: complex, zeta: complex) -> int:
    """Index j with preimage_branch(w, j) nearest to zeta"""
    if not satisfies(params, zeta, w):
        raise InvalidPairError(f"({zeta}, {w}) does not satisfy the correspondence")
    return int(np.argmin([abs(v - zeta) for v in preimages(params, w)]))


def branch_derivative(params: CorrespondenceParams, z: complex, w: complex) -> complex:
    """Derivative (p/q)(w - c)/z of the branch through (z, w)"""
    if not satisfies(params, z, w):
        raise InvalidPairError(
            f"residual {residual(params, z, w):.3g} too large for ({z}, {w})"
        )
    if z == 0:
        if params.integer_beta:
            return 0j
        raise BranchPointError("derivative undefined at the branch point z = 0")
    return params.beta_float * (w - params.c) / z


def escape_radius(params: CorrespondenceParams) -> float:
    """Root in [1, s_c] of x^(p/q) - x - |c|; every |z| beyond it escapes"""
    a = abs(params.c)
    if a == 0:
        return 1.0
    beta = params.beta_float
    s_c = (1 + a) ** (1 / params.gamma)
    return optimize.bisect(lambda x: x ** beta - x - a, 1.0, s_c, xtol=ROOT_XTOL)


def annulus_bounds(params: CorrespondenceParams) -> AnnulusBounds:
    """
    Trapping annulus R_c <= |z| <= s_c.

    r_c < R_c are the roots of g_c(x) = x^(p/q) - x + |c| on (0, 1), located by a
    sign scan and refined by bisection. No sign change means |c| is too large and
    the bounds come back with NaN radii and valid=False.
    """
    a = abs(params.c)
    beta = params.beta_float
    s_c = (1 + a) ** (1 / params.gamma)
    escape = escape_radius(params)
    if a == 0:
        return AnnulusBounds(r_c=0.0, R_c=1.0, s_c=s_c, escape_radius=escape, valid=True)

    def g(x: float) -> float:
        return x ** beta - x + a

    xs = np.linspace(1e-12, 1 - 1e-12, SCAN_POINTS)
    values = xs ** beta - xs + a
    changes = np.nonzero(np.sign(values[:-1]) != np.sign(values[1:]))[0]
    if len(changes) < 2:
        logger.info("annulus_bounds: no trapping annulus for |c|=%.6g (p=%d, q=%d)", a, params.p, params.q)
        return AnnulusBounds(r_c=math.nan, R_c=math.nan, s_c=s_c, escape_radius=escape, valid=False)

    lo, hi = changes[0], changes[-1]
    r_c = optimize.bisect(g, xs[lo], xs[lo + 1], xtol=ROOT_XTOL)
    R_c = optimize.bisect(g, xs[hi], xs[hi + 1], xtol=ROOT_XTOL)
    logger.debug("annulus_bounds: r_c=%.12g R_c=%.12g s_c=%.12g", r_c, R_c, s_c)
    return AnnulusBounds(r_c=r_c, R_c=R_c, s_c=s_c, escape_radius=escape, valid=True)


def estimate_expansion(
    params: CorrespondenceParams,
    samples: Iterable[complex],
    radius: float,
) -> ExpansionEstimate:
    """
    Euclidean expansion constants over a sample set.

    Forward branches have |phi'| = (p/q)|z|^(p/q - 1); inverse branches have
    |phi'| = |zeta| / ((p/q)|z - c|). Both are independent of the branch index.
    """
    z = np.asarray(list(samples), dtype=complex)
    if z.size == 0:
        raise DegenerateSampleError("no samples")
    too_close = (np.abs(z) < radius) | (np.abs(z - params.c) < radius)
    if too_close.any():
        bad = z[too_close][0]
        raise DegenerateSampleError(f"sample {bad} within {radius} of 0 or c")

    beta = params.beta_float
    forward = beta * np.abs(z) ** (beta - 1)
    dist_c = np.abs(z - params.c)
    backward = dist_c ** (1 / beta) / (beta * dist_c)
    estimate = ExpansionEstimate(inverse_min=float(forward.min()), backward_max=float(backward.max()))
    logger.debug("estimate_expansion: %s over %d samples", estimate, z.size)
    return estimate
