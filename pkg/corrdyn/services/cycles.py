"""
Periodic orbits of the correspondence
Exact periodic points at c = 0, Newton solves along a branch word, continuation in c,
and the attracting-cycle search behind dual Julia sets
"""
import cmath
import functools
import itertools
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize
from scipy.spatial.distance import directed_hausdorff

from corrdyn.errors import (
    BranchCollapseError,
    BranchPointError,
    ContinuationStuckError,
    NoConvergenceError,
    NumericError,
    ParameterError,
)
from corrdyn.parallel import parallel_map
from corrdyn.schemas import CorrespondenceParams, Cycle, CycleKind, SymbolSequence
from corrdyn.services.correspondence import branch_image

logger = logging.getLogger(__name__)

NEWTON_TOL = 1e-12
NEWTON_MAXITER = 50
COLLAPSE_RADIUS = 1e-9
CLOSURE_TOL = 1e-9
DEDUP_TOL = 1e-8
MIN_STEP = 1e-8
# continued points may move at most this multiple of |delta c| per step
JUMP_FACTOR = 100.0


def _check_word(params: CorrespondenceParams, symbols: Sequence[int]) -> None:
    if len(symbols) == 0:
        raise ParameterError("symbol word must be nonempty")
    bad = [k for k in symbols if not 0 <= k < params.q]
    if bad:
        raise ParameterError(f"symbols {bad} outside 0..{params.q - 1}")


def _slope(params: CorrespondenceParams, z: complex, w: complex) -> complex:
    """(p/q)(w - c)/z along a computed step; 0 at z = 0 in integer mode"""
    if z == 0:
        return 0j
    return params.beta_float * (w - params.c) / z


def compose(params: CorrespondenceParams, z: complex, symbols: Sequence[int]) -> Tuple[List[complex], complex]:
    """
    Follow the branch word from z.

    Returns the visited points z_0..z_n and the derivative of the composed branch.
    In non-integer mode an orbit passing within 1e-9 of 0 or c raises BranchCollapseError.
    """
    points = [complex(z)]
    derivative = 1 + 0j
    for k in symbols:
        current = points[-1]
        if not params.integer_beta and (
            abs(current) < COLLAPSE_RADIUS or abs(current - params.c) < COLLAPSE_RADIUS
        ):
            raise BranchCollapseError(f"orbit reached a branch point at {current}")
        try:
            nxt = branch_image(params, current, k)
        except BranchPointError as exc:
            raise BranchCollapseError(str(exc)) from exc
        derivative *= _slope(params, current, nxt)
        points.append(nxt)
    return points, derivative


def classify(points: Sequence[complex], multiplier: complex) -> Tuple[complex, CycleKind]:
    """Cycles through 0 are attracting with multiplier 0; neutral counts as attracting"""
    if any(abs(z) < COLLAPSE_RADIUS for z in points):
        return 0j, CycleKind.ATTRACTING
    if abs(multiplier) > 1:
        return multiplier, CycleKind.REPELLING
    return multiplier, CycleKind.ATTRACTING


def unit_circle_periodic_points(params: CorrespondenceParams, n: int, cap: Optional[int] = None) -> List[complex]:
    """The p^n - q^n roots of unity solving z^(q^n) = z^(p^n) at c = 0"""
    if params.c != 0:
        raise ParameterError("unit circle periodic points exist only at c = 0")
    if n < 1:
        raise ParameterError("period must be >= 1")
    if cap is None:
        from corrdyn.config import settings
        cap = settings.periodic_point_cap
    m = params.p ** n - params.q ** n
    if m > cap:
        raise OverflowError(f"p^n - q^n = {m} exceeds the cap {cap}")
    return [cmath.exp(2j * math.pi * j / m) for j in range(m)]


def periodic_word(params: CorrespondenceParams, z: complex, n: int, tol: float = CLOSURE_TOL) -> Optional[SymbolSequence]:
    """First word of length n (lexicographic) whose branches bring z back to itself"""
    for word in itertools.product(range(params.q), repeat=n):
        try:
            points, _ = compose(params, z, word)
        except (NumericError, OverflowError):
            continue
        if abs(points[-1] - z) <= tol * max(1.0, abs(z)):
            return list(word)
    return None


def cycle_from_symbols(params: CorrespondenceParams, symbols: Sequence[int], seed: complex) -> Cycle:
    """
    Solve Phi(z) = z for the composed branch Phi along symbols.

    Newton iteration (scipy) with tolerance 1e-12 and at most 50 steps; the
    multiplier is the product of branch derivatives along the orbit.
    """
    _check_word(params, symbols)
    if seed == 0 and not params.integer_beta:
        raise ParameterError("seed must avoid the branch point 0")

    def residual(z: complex) -> complex:
        points, _ = compose(params, z, symbols)
        return points[-1] - z

    def slope(z: complex) -> complex:
        _, derivative = compose(params, z, symbols)
        return derivative - 1

    try:
        root, info = optimize.newton(
            residual, complex(seed), fprime=slope, tol=NEWTON_TOL, maxiter=NEWTON_MAXITER,
            full_output=True, disp=False,
        )
    except (OverflowError, ZeroDivisionError, FloatingPointError) as exc:
        raise NoConvergenceError(f"Newton diverged from seed {seed}: {exc}") from exc

    z0 = complex(root)
    if not cmath.isfinite(z0):
        raise NoConvergenceError(f"Newton diverged from seed {seed}")
    try:
        points, derivative = compose(params, z0, symbols)
    except OverflowError as exc:
        raise NoConvergenceError(str(exc)) from exc
    closure = abs(points[-1] - z0)
    if closure > CLOSURE_TOL * max(1.0, abs(z0)):
        raise NoConvergenceError(
            f"no cycle for word {list(symbols)} from seed {seed} "
            f"(closure {closure:.3g}, converged={info.converged})"
        )

    multiplier, kind = classify(points[:-1], derivative)
    return Cycle(points=points[:-1], symbols=list(symbols), multiplier=multiplier, kind=kind)


def continue_cycle(
    params_from: CorrespondenceParams,
    params_to: CorrespondenceParams,
    cycle: Cycle,
    max_step: float,
    min_step: float = MIN_STEP,
) -> Cycle:
    """
    Follow a cycle along the segment from params_from.c to params_to.c.

    Each step re-solves with the previous points as seeds. A step is rejected when
    Newton fails, the kind changes or the points jump; rejected steps are halved
    and accepted ones grow back up to max_step.
    """
    if (params_from.p, params_from.q) != (params_to.p, params_to.q):
        raise ParameterError("continuation only varies c")
    if max_step <= 0:
        raise ParameterError("max_step must be positive")

    c0, c1 = params_from.c, params_to.c
    total = abs(c1 - c0)
    if total == 0:
        return cycle

    current = cycle
    s = 0.0
    step = max_step
    steps = 0
    while s < 1.0:
        h = min(step / total, 1.0 - s)
        c_next = c0 + (s + h) * (c1 - c0) if s + h < 1.0 else c1
        try:
            candidate = cycle_from_symbols(params_from.with_c(c_next), current.symbols, current.points[0])
            jump = max(abs(a - b) for a, b in zip(candidate.points, current.points))
            if candidate.kind != current.kind or jump > max(JUMP_FACTOR * h * total, 1e-9):
                raise NoConvergenceError(f"branch jump of {jump:.3g} at c={c_next}")
        except (NumericError, ParameterError, OverflowError) as exc:
            step /= 2
            logger.debug("continue_cycle: halving step to %.3g at c=%s (%s)", step, c_next, exc)
            if step < min_step:
                raise ContinuationStuckError(
                    f"step underflow continuing {current.symbols} at c={c0 + s * (c1 - c0)}"
                ) from exc
            continue
        current = candidate
        s += h
        steps += 1
        step = min(2 * step, max_step)

    logger.info("continue_cycle: %s reached c=%s in %d steps", current.symbols, c1, steps)
    provenance = {"source_c": [c0.real, c0.imag], "steps": steps}
    return current.model_copy(update={"provenance": provenance})


def hausdorff(a: Sequence[complex], b: Sequence[complex]) -> float:
    """Symmetric Hausdorff distance between two finite point sets"""
    u = np.column_stack([np.real(a), np.imag(a)])
    v = np.column_stack([np.real(b), np.imag(b)])
    return max(directed_hausdorff(u, v)[0], directed_hausdorff(v, u)[0])


def dedupe_cycles(cycles: Sequence[Cycle], tol: float = DEDUP_TOL) -> List[Cycle]:
    """Keep the first of every group of cycles with point sets closer than tol"""
    kept: List[Cycle] = []
    for cycle in cycles:
        if all(hausdorff(cycle.points, other.points) >= tol for other in kept):
            kept.append(cycle)
    return kept


def default_grid(n: int = 16) -> List[complex]:
    """n x n seeds on [-1, 1]^2"""
    axis = np.linspace(-1.0, 1.0, n)
    return [complex(x, y) for y in axis for x in axis]


def two_cycle_parameters(d: int) -> List[complex]:
    """
    Unit-circle parameters where (2d, 2) has the critical 2-cycle 0 -> c -> 0.

    These are the d - 1 roots of c^(d-1) = -1, so that c + c^d = 0; the other image
    c - c^d = 2c of c lies outside the escape radius.
    """
    if d < 2:
        raise ParameterError("d must be >= 2")
    return [cmath.exp(1j * math.pi * (2 * k + 1) / (d - 1)) for k in range(d - 1)]


def critical_cycles(params: CorrespondenceParams, max_period: int) -> List[Cycle]:
    """Cycles through the branch point: 0 -> c -> ... -> 0 of length <= max_period"""
    found: List[Cycle] = []
    for n in range(1, max_period + 1):
        for word in itertools.product(range(params.q), repeat=n - 1):
            points = [0j, complex(params.c)]
            try:
                for k in word:
                    if abs(points[-1]) < COLLAPSE_RADIUS:
                        break
                    points.append(branch_image(params, points[-1], k))
            except (BranchPointError, OverflowError):
                continue
            if len(points) != n + 1 or abs(points[-1]) >= COLLAPSE_RADIUS:
                continue
            if any(abs(z) < COLLAPSE_RADIUS for z in points[1:-1]):
                continue
            found.append(Cycle(
                points=points[:-1],
                symbols=[0, *word],
                multiplier=0j,
                kind=CycleKind.ATTRACTING,
            ))
    return dedupe_cycles(found)


def _attracting_for_word(params: CorrespondenceParams, seeds: Sequence[complex], word: Tuple[int, ...]) -> List[Cycle]:
    found = []
    for seed in seeds:
        if seed == 0 and not params.integer_beta:
            continue
        try:
            cycle = cycle_from_symbols(params, word, seed)
        except (NumericError, OverflowError):
            continue
        if cycle.kind == CycleKind.ATTRACTING:
            found.append(cycle)
    return dedupe_cycles(found)


def attracting_cycles_search(
    params: CorrespondenceParams,
    max_period: int,
    grid: Optional[Sequence[complex]] = None,
    workers: int = 1,
) -> List[Cycle]:
    """
    Attracting cycles found from every seed and every word up to max_period.

    Cycles through 0 come first, then Newton results in word order, then seed order.
    """
    if max_period < 1:
        raise ParameterError("max_period must be >= 1")
    seeds = list(grid) if grid is not None else default_grid()
    words = [w for n in range(1, max_period + 1) for w in itertools.product(range(params.q), repeat=n)]
    per_word = parallel_map(functools.partial(_attracting_for_word, params, seeds), words, workers=workers)
    merged = critical_cycles(params, max_period) + [c for batch in per_word for c in batch]
    result = dedupe_cycles(merged)
    logger.info("attracting_cycles_search: %d cycles (p=%d q=%d c=%s)", len(result), params.p, params.q, params.c)
    return result
