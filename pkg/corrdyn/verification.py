"""
Invariant suite
Each check returns (passed, message); the report prints one line per check and the
suite passes only when every check does
"""
import cmath
import logging
import math
from functools import cached_property
from typing import Callable, List, Tuple

import numpy as np

from corrdyn.schemas import BundleParams, CorrespondenceParams, Cycle, CycleKind, TorusPoint
from corrdyn.services.bundle import (
    bundle_jacobian,
    bundle_map,
    bundle_map_c2,
    bundle_point_from_orbit,
    bundle_preimage,
    choose_bundle_params,
    enumerate_sections,
    forward_orbit,
    metric_ds,
    mixing_diagnostic,
    periodic_orbit,
    reencode,
)
from corrdyn.services.correspondence import (
    annulus_bounds,
    branch_derivative,
    branch_image,
    estimate_expansion,
    images,
    preimages,
)
from corrdyn.services.cycles import (
    attracting_cycles_search,
    continue_cycle,
    cycle_from_symbols,
    default_grid,
    hausdorff,
    periodic_word,
    unit_circle_periodic_points,
)
from corrdyn.services.motion import (
    branched_motion,
    circle_samples,
    conjugacy_defect,
    curve_dilatation,
    curve_sample,
    estimate_motion_config,
    hausdorff_distance,
    holomorphy_residual,
    injectivity_check,
    lipschitz_estimate,
    motion_point,
    roundtrip_error,
    sector_width,
    shadow_orbit,
)
from corrdyn.services.render import (
    default_viewport,
    dual_ifs_sample,
    inverse_ifs_sample,
    membership_grid,
)
from corrdyn.services.solenoid import (
    deck_transform,
    nearest_distance,
    quotient_equal,
    random_addresses,
    symbolic_angles,
    symbolic_point,
    symbolic_to_torus,
    theta,
    torus_iterate_arrays,
    torus_map,
)

logger = logging.getLogger(__name__)

CheckResult = Tuple[bool, str]

SHADOW_DEPTH = 20
BUFFER = 20
LADDER_TOP = 0.02


class SuiteContext:
    """Shared, lazily built inputs of the suite"""

    def __init__(self, params: CorrespondenceParams, seed: int = 0, workers: int = 1):
        self.params = params
        self.base = params.with_c(0)
        self.seed = seed
        self.workers = workers
        self.bounds = annulus_bounds(params)

    def rng(self, offset: int = 0) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed + offset))

    def annulus_points(self, count: int, offset: int = 0, lo: float = 0.5, hi: float = 2.0) -> List[complex]:
        rng = self.rng(offset)
        radii = rng.uniform(lo, hi, size=count)
        angles = rng.uniform(-math.pi, math.pi, size=count)
        return [complex(r * math.cos(a), r * math.sin(a)) for r, a in zip(radii, angles)]

    @cached_property
    def fixed_cycle(self) -> Cycle:
        """The fixed point through 1 at c = 0, continued to c"""
        start = cycle_from_symbols(self.base, [0], 1 + 0j)
        return continue_cycle(self.base, self.params, start, max_step=0.01)

    @cached_property
    def bundle_params(self) -> BundleParams:
        return choose_bundle_params(self.params, self.bounds)

    @cached_property
    def base_bundle_params(self) -> BundleParams:
        return choose_bundle_params(self.base, annulus_bounds(self.base))

    @cached_property
    def motion_config(self):
        return estimate_motion_config(self.base, circle_samples(64))

    @cached_property
    def motion_target(self) -> CorrespondenceParams:
        """params itself inside the certified disk, else the same direction at half its radius"""
        c = self.params.c
        radius = self.motion_config.u_radius
        if abs(c) < radius:
            return self.params
        return self.params.with_c(radius / 2 * c / abs(c))

    @property
    def motion_note(self) -> str:
        if self.motion_target is self.params:
            return ""
        return f" [certified target c={self.motion_target.c:.4g}]"

    def symbolic_points(self, count: int, length: int, offset: int = 0):
        return [
            symbolic_point(self.base_bundle_params, self.base, t, tau, length)
            for t, tau in random_addresses(self.base, count, length, self.seed + offset)
        ]


def _cycle_steps_ok(params: CorrespondenceParams, cycle: Cycle) -> bool:
    n = cycle.period
    for i, z in enumerate(cycle.points):
        if abs(z) < 1e-9:
            continue
        nxt = cycle.points[(i + 1) % n]
        if abs(branch_image(params, z, cycle.symbols[i]) - nxt) > 1e-9 * max(1.0, abs(nxt)):
            return False
    return True


# --- correspondence ---

def check_image_preimage_duality(ctx: SuiteContext) -> CheckResult:
    """w in images(z) iff z in preimages(w)"""
    for z in ctx.annulus_points(50):
        for w in images(ctx.params, z):
            if min(abs(zeta - z) for zeta in preimages(ctx.params, w)) > 1e-9:
                return False, f"{z} missing from the preimages of {w}"
    return True, "images and preimages match on 50 samples"


def check_translation_identity(ctx: SuiteContext) -> CheckResult:
    """preimages at c and w equal preimages at c' and w - c + c'"""
    shifted = ctx.params.with_c(ctx.params.c + 0.1)
    worst = 0.0
    for w in ctx.annulus_points(50, offset=1):
        a = preimages(ctx.params, w)
        b = preimages(shifted, w - ctx.params.c + shifted.c)
        worst = max(worst, max(abs(x - y) for x, y in zip(a, b)))
    return worst <= 1e-12, f"max elementwise difference {worst:.3g}"


def check_branch_derivative(ctx: SuiteContext) -> CheckResult:
    """(p/q)(w - c)/z against central differences, step 1e-6"""
    h = 1e-6
    rng = ctx.rng(2)
    worst = 0.0
    for z in ctx.annulus_points(200, offset=2):
        k = int(rng.integers(ctx.params.q))
        w = branch_image(ctx.params, z, k)
        exact = branch_derivative(ctx.params, z, w)
        numeric = (branch_image(ctx.params, z + h, k) - branch_image(ctx.params, z - h, k)) / (2 * h)
        worst = max(worst, abs(exact - numeric) / abs(exact))
    return worst <= 1e-6, f"max relative error {worst:.3g}"


def check_image_separation(ctx: SuiteContext) -> CheckResult:
    """q distinct images at least 2 sin(pi/q)|z|^(p/q) apart"""
    q = ctx.params.q
    if q == 1:
        return True, "single image (q = 1)"
    for z in ctx.annulus_points(50, offset=3):
        ws = images(ctx.params, z)
        gap = min(abs(ws[i] - ws[j]) for i in range(q) for j in range(i + 1, q))
        bound = 2 * math.sin(math.pi / q) * abs(z) ** ctx.params.beta_float - 1e-9
        if gap < bound:
            return False, f"images of {z} only {gap:.3g} apart"
    return True, "image spacing respects the bound"


def check_escape_invariance(ctx: SuiteContext) -> CheckResult:
    """Beyond s_c every image is farther out"""
    s_c = ctx.bounds.s_c
    rng = ctx.rng(4)
    for _ in range(100):
        z = cmath.rect(s_c * (1 + 1e-9) * (1 + 2 * rng.random()), rng.uniform(-math.pi, math.pi))
        if any(abs(w) <= abs(z) for w in images(ctx.params, z)):
            return False, f"an image of {z} does not escape"
    return True, f"escape beyond s_c={s_c:.6g} confirmed"


def check_annulus_roots(ctx: SuiteContext) -> CheckResult:
    """0 < r_c < R_c < 1 < s_c with g_c vanishing at both radii"""
    b = ctx.bounds
    if not b.valid:
        return True, f"no trapping annulus at |c|={abs(ctx.params.c):.4g}"
    if ctx.params.c == 0:
        return (b.r_c, b.R_c, b.s_c) == (0.0, 1.0, 1.0), "c = 0 limit values"
    a = abs(ctx.params.c)
    g = lambda x: x ** ctx.params.beta_float - x + a  # noqa: E731
    ordered = 0 < b.r_c < b.R_c < 1 < b.s_c
    roots = abs(g(b.r_c)) <= 1e-9 and abs(g(b.R_c)) <= 1e-9
    return ordered and roots, f"r_c={b.r_c:.6g} R_c={b.R_c:.6g} s_c={b.s_c:.6g}"


# --- cycles ---

def check_periodic_points(ctx: SuiteContext) -> CheckResult:
    """c = 0 census re-found by Newton; elsewhere continuation is reversible"""
    params = ctx.params
    if params.c == 0:
        beta = params.beta_float
        coprime = math.gcd(params.p, params.q) == 1
        closed = []
        for n in (1, 2):
            count = 0
            for z in unit_circle_periodic_points(params, n):
                word = periodic_word(params, z, n)
                if word is None:
                    # with a common factor some roots are not reached by any branch word
                    if coprime:
                        return False, f"no word of length {n} closes at {z}"
                    continue
                count += 1
                cycle = cycle_from_symbols(params, word, z)
                if abs(cycle.points[0] - z) > 1e-9:
                    return False, f"Newton left the periodic point {z}"
                if abs(abs(cycle.multiplier) - beta ** n) > 1e-9 * beta ** n:
                    return False, f"multiplier {abs(cycle.multiplier):.12g} != {beta ** n:.12g}"
            closed.append(count)
        return True, f"periods 1 and 2: {closed[0]} and {closed[1]} periodic points re-found"

    cycle = ctx.fixed_cycle
    back = continue_cycle(params, ctx.base, cycle, max_step=0.01)
    gap = hausdorff(back.points, [1 + 0j])
    ok = _cycle_steps_ok(params, cycle) and gap <= 1e-8 and cycle.kind == CycleKind.REPELLING
    return ok, f"fixed point {cycle.points[0]:.10g} after {cycle.provenance['steps']} steps, return gap {gap:.3g}"


def check_attracting_cycles(ctx: SuiteContext) -> CheckResult:
    """Search results are attracting and satisfy the step invariant"""
    cycles = attracting_cycles_search(ctx.params, 2, default_grid(8), workers=ctx.workers)
    for cycle in cycles:
        if cycle.kind != CycleKind.ATTRACTING or not _cycle_steps_ok(ctx.params, cycle):
            return False, f"invalid cycle {cycle.points}"
        through_zero = any(abs(z) < 1e-9 for z in cycle.points)
        if through_zero and cycle.multiplier != 0:
            return False, "cycle through 0 with nonzero multiplier"
    return True, f"{len(cycles)} attracting cycles up to period 2"


# --- bundle ---

def check_bundle_encoding(ctx: SuiteContext) -> CheckResult:
    """Semi-conjugacy, reconstruction, C^2 formula, Jacobian and re-encoding"""
    if not ctx.bounds.valid:
        return True, "skipped: no trapping annulus"
    params, bp, cycle = ctx.params, ctx.bundle_params, ctx.fixed_cycle
    orbit = periodic_orbit(cycle, 40)
    x = bundle_point_from_orbit(bp, orbit)
    shifted = bundle_map(params, bp, x)
    if shifted.base != orbit.points[1]:
        return False, "projection of the bundle map is not the recorded image"

    bases = []
    y = x
    for _ in range(39):
        y = bundle_map(params, bp, y)
        bases.append(y.base)
    rebuilt = bp.r * sum(bp.delta ** n * z for n, z in enumerate(bases))
    slack = bp.r * bp.delta ** 39 * max(abs(z) for z in orbit.points) / (1 - bp.delta)
    if abs(rebuilt - x.series) > slack + 1e-12:
        return False, f"reconstruction off by {abs(rebuilt - x.series):.3g}"

    _, w = bundle_map_c2(params, bp, x.base, x.series, orbit.symbols[0])
    if abs(w - shifted.series) > x.tail_bound / bp.delta + 1e-12:
        return False, "C^2 formula disagrees with the shifted series"

    det = bundle_jacobian(params, bp, x, cycle.period)
    expected = abs(cycle.multiplier) / bp.delta ** cycle.period
    if abs(abs(det) - expected) > 1e-9 * expected:
        return False, f"|det Jac| {abs(det):.12g} != {expected:.12g}"

    other = BundleParams(r=bp.r / 2, delta=bp.delta / 2)
    there = reencode(params, x, bp, other, depth=10)
    back = reencode(params, there, other, bp, depth=10)
    truncated = bundle_point_from_orbit(bp, orbit.truncated(10))
    if back.base != x.base or back.orbit.symbols != orbit.symbols[:10]:
        return False, "re-encoding changed the orbit"
    if abs(back.series - truncated.series) > back.tail_bound + truncated.tail_bound + 1e-12:
        return False, "re-encoding changed the series"
    return True, f"r={bp.r:.6g} delta={bp.delta:.6g} |det|={abs(det):.6g}"


def check_metric(ctx: SuiteContext) -> CheckResult:
    """d_s vanishes on the diagonal, is symmetric and contracts under inverse branches"""
    if not ctx.bounds.valid:
        return True, "skipped: no trapping annulus"
    params, bp = ctx.params, ctx.bundle_params
    s, depth = 0.5, 8
    z0 = ctx.fixed_cycle.points[0]
    word = [ctx.fixed_cycle.symbols[0]] * depth
    x = bundle_point_from_orbit(bp, forward_orbit(params, z0, word))
    y = bundle_point_from_orbit(bp, forward_orbit(params, z0 * cmath.exp(1e-7j), word))
    d_xx, _ = metric_ds(s, x, x, depth, ctx.bounds.s_c)
    d_xy, _ = metric_ds(s, x, y, depth, ctx.bounds.s_c)
    d_yx, _ = metric_ds(s, y, x, depth, ctx.bounds.s_c)
    if d_xx != 0 or d_xy != d_yx:
        return False, "d_s is not a symmetric distance"

    gx = bundle_preimage(params, bp, x, 0)
    gy = bundle_preimage(params, bp, y, 0)
    d_g, _ = metric_ds(s, gx, gy, depth, ctx.bounds.s_c)
    pts = list(x.orbit.points) + list(y.orbit.points) + [gx.base, gy.base]
    lam = 1 / estimate_expansion(params, pts, 1e-9).inverse_min
    factor = lam * (1 - s) / (1 - s ** depth) + s
    ok = d_g <= 1.01 * factor * d_xy
    return ok, f"contraction {d_g / d_xy:.4f} <= {factor:.4f}"


def check_sections(ctx: SuiteContext) -> CheckResult:
    """Distinct words give disjoint sections at depths 1 and 2"""
    if not ctx.bounds.valid:
        return True, "skipped: no trapping annulus"
    radius = abs(ctx.fixed_cycle.points[0])
    arc = [cmath.rect(radius, a) for a in np.linspace(0.0, math.pi / 2, 16)]
    for depth in (1, 2):
        table = enumerate_sections(ctx.params, ctx.bundle_params, arc, depth, workers=ctx.workers)
        if not table.separated:
            return False, f"sections overlap at depth {depth}"
    return True, f"{ctx.params.q ** 2} separated sections at depth 2"


def check_mixing(ctx: SuiteContext) -> CheckResult:
    """A 10 degree arc of the circle covers it at c = 0"""
    sample = circle_samples(256)
    arc = [cmath.exp(1j * a) for a in np.linspace(0.0, math.radians(10), 20)]
    n = mixing_diagnostic(ctx.base, sample, arc, 0.05, 12)
    return n is not None and n <= 5, f"eps-net after {n} steps"


# --- solenoid ---

def check_theta_consistency(ctx: SuiteContext) -> CheckResult:
    """(e^{i theta_k(t)})^q = (e^{it})^p"""
    params = ctx.base
    rng = ctx.rng(5)
    worst = 0.0
    for _ in range(100):
        t = rng.uniform(0, 2 * math.pi)
        k = int(rng.integers(params.q))
        worst = max(worst, abs(cmath.exp(1j * theta(params, k, t)) ** params.q - cmath.exp(1j * t) ** params.p))
    return worst <= 1e-12, f"max deviation {worst:.3g}"


def check_solenoid_constructions(ctx: SuiteContext) -> CheckResult:
    """Symbolic points lie in omega^N of the torus; both constructions share the fixed point"""
    params, bp = ctx.base, ctx.base_bundle_params
    n = 20
    for t, tau in random_addresses(params, 100, n, ctx.seed + 6):
        sp = symbolic_point(bp, params, t, tau, n)
        tp = symbolic_to_torus(bp, params, t, tau, n)
        if abs(cmath.exp(1j * tp.t) - sp.base) > 1e-10 or abs(tp.disk - sp.series) > sp.tail_bound + 1e-10:
            return False, f"torus realisation of (t={t:.6g}, tau) misses the symbolic point"

    for t, tau in random_addresses(params, 5, 3, ctx.seed + 7):
        sp = symbolic_point(bp, params, t, tau, 3)
        seed_angle = math.fmod(symbolic_angles(params, t, tau, 3)[3][0], 2 * math.pi)
        cloud_t, cloud_d = torus_iterate_arrays(bp, params, [TorusPoint(t=seed_angle, disk=0j)], 3)
        if nearest_distance(cloud_t, cloud_d, [sp.c2])[0] > sp.tail_bound + 1e-10:
            return False, "symbolic point outside the iterated torus cloud"

    r_fixed = bp.r / (1 - bp.delta)
    sp = symbolic_point(bp, params, 0.0, [0] * n, n)
    tp = torus_map(bp, params, 0, TorusPoint(t=0.0, disk=r_fixed))
    if abs(sp.series - r_fixed) > sp.tail_bound + 1e-12 or abs(tp.disk - r_fixed) > 1e-12 or tp.t != 0.0:
        return False, "fixed point (1, r/(1 - delta)) not reproduced"
    return True, "100 realisations within tail, fixed point shared"


def check_solenoid_injectivity(ctx: SuiteContext) -> CheckResult:
    """Different truncated addresses give points farther apart than their tails"""
    params, bp = ctx.base, ctx.base_bundle_params
    n = 20
    rng = ctx.rng(8)
    compared = 0
    for _ in range(200):
        t = float(rng.uniform(0, 2 * math.pi))
        same_base = rng.random() < 0.5
        t2 = t if same_base else float(rng.uniform(0, 2 * math.pi))
        tau = [int(k) for k in rng.integers(0, params.q, size=n)]
        tau2 = [int(k) for k in rng.integers(0, params.q, size=n)]
        if t == t2 and tau == tau2:
            continue
        first = next((i for i in range(n) if tau[i] != tau2[i]), n)
        if t == t2 and bp.r * bp.delta ** first < 1e-12:
            continue
        a = symbolic_point(bp, params, t, tau, n)
        b = symbolic_point(bp, params, t2, tau2, n)
        if quotient_equal(a, b, a.tail_bound + b.tail_bound):
            return False, f"addresses collide at t={t:.6g}"
        compared += 1
    return True, f"{compared} pairs separated"


def check_deck_transform(ctx: SuiteContext) -> CheckResult:
    """g(t + 2 pi m, tau') equals g(t, tau)"""
    params, bp = ctx.base, ctx.base_bundle_params
    for i, (t, tau) in enumerate(random_addresses(params, 20, 20, ctx.seed + 9)):
        turns = 1 + i % 3
        moved = deck_transform(params, tau, turns)
        a = symbolic_point(bp, params, t, tau, 20)
        b = symbolic_point(bp, params, t + 2 * math.pi * turns, moved, 20)
        if not quotient_equal(a, b, 1e-10):
            return False, f"deck transform by {turns} turns failed"
    return True, "20 deck transforms agree"


# --- motion ---

def check_motion_identity_and_conjugacy(ctx: SuiteContext) -> CheckResult:
    """Identity at the base, conjugacy defect, round trip, shadow proximity and the Hausdorff bound"""
    cfg = ctx.motion_config
    base, target, bp = ctx.base, ctx.motion_target, ctx.base_bundle_params
    buffer = BUFFER
    points = ctx.symbolic_points(20, SHADOW_DEPTH + buffer + 1, offset=10)
    if motion_point(base, base, bp, points[0], cfg, SHADOW_DEPTH, buffer) is not points[0]:
        return False, "motion at the base parameter is not the identity"
    worst_defect = worst_trip = worst_drift = 0.0
    dc = abs(target.c)
    for x in points:
        worst_defect = max(worst_defect, conjugacy_defect(base, target, bp, x, cfg, SHADOW_DEPTH, buffer))
        worst_trip = max(worst_trip, roundtrip_error(base, target, x, cfg, SHADOW_DEPTH))
        shadow = shadow_orbit(base, target, x.orbit, cfg)
        worst_drift = max(worst_drift, max(abs(a - b) for a, b in zip(shadow.points, x.orbit.points)))
    spread = hausdorff_distance(base, target, bp, points, cfg, SHADOW_DEPTH, buffer)
    trip_bound = 2 * cfg.lam ** buffer * cfg.eps + 1e-12
    drift_bound = cfg.ell * dc / (1 - cfg.lam) + 1e-12
    ok = worst_defect <= 1e-8 and worst_trip <= trip_bound and worst_drift <= drift_bound and spread <= drift_bound
    return ok, (
        f"defect {worst_defect:.3g}, round trip {worst_trip:.3g}, drift {worst_drift:.3g}, "
        f"Hausdorff {spread:.3g} (bound {drift_bound:.3g}){ctx.motion_note}"
    )


def check_motion_regularity(ctx: SuiteContext) -> CheckResult:
    """Lipschitz constant below C0, Cauchy-Riemann residual below 1e-4 and decaying quadratically"""
    cfg = ctx.motion_config
    base, bp = ctx.base, ctx.base_bundle_params
    x = ctx.symbolic_points(1, SHADOW_DEPTH + BUFFER, offset=11)[0]
    c = ctx.motion_target.c
    spacing = max(abs(c) / 4, 1e-3)
    grid = [c + spacing * complex(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1)]
    lipschitz = lipschitz_estimate(base, grid, bp, x, cfg, SHADOW_DEPTH, BUFFER)
    residual = holomorphy_residual(base, bp, x, [c], cfg, SHADOW_DEPTH, h_step=1e-3, buffer=BUFFER)
    residual_half = holomorphy_residual(base, bp, x, [c], cfg, SHADOW_DEPTH, h_step=5e-4, buffer=BUFFER)
    ok = lipschitz <= cfg.c0 and residual <= 1e-4 and residual_half <= 2.5e-5
    return ok, (
        f"Lipschitz {lipschitz:.4g} <= C0={cfg.c0:.4g}, residual {residual:.3g} (h=1e-3) "
        f"{residual_half:.3g} (h=5e-4){ctx.motion_note}"
    )


def check_branched_motion(ctx: SuiteContext) -> CheckResult:
    """Every branch of the plane motion stays within C0 |c| of the base point"""
    cfg = ctx.motion_config
    target = ctx.motion_target
    words = [[k] for k in range(ctx.params.q)]
    moved = branched_motion(ctx.base, target, ctx.base_bundle_params, 1 + 0j, words, cfg, SHADOW_DEPTH, BUFFER)
    bound = cfg.c0 * abs(target.c) + 1e-9
    far = max(abs(w - 1) for w in moved)
    return far <= bound, f"{len(moved)} images, farthest {far:.3g} <= {bound:.3g}{ctx.motion_note}"


def check_curve(ctx: SuiteContext) -> CheckResult:
    """The leaf over a quarter turn is injective, sectorial and conformal at c = 0"""
    cfg = ctx.motion_config
    bp = ctx.base_bundle_params
    curve = curve_sample(
        ctx.motion_target, bp, [0], (0.0, math.pi / 2), 100, cfg, SHADOW_DEPTH, BUFFER, workers=ctx.workers
    )
    if not injectivity_check(curve, 1e-8):
        return False, "curve not injective"
    width = sector_width(curve.z)
    if width >= 2 * math.pi:
        return False, "curve winds around 0"
    circle = curve_sample(ctx.base, bp, [0], (0.0, math.pi / 2), 100, cfg, SHADOW_DEPTH, BUFFER)
    k0 = curve_dilatation(circle)
    return abs(k0 - 1) <= 1e-9, f"sector width {width:.4f}, dilatation at c=0 {k0:.12g}{ctx.motion_note}"


def check_dilatation_ladder(ctx: SuiteContext) -> CheckResult:
    """Dilatation of the leaf 0^inf is 1 at c = 0, at most 1.5 and non-increasing as |c| halves"""
    cfg = ctx.motion_config
    bp = ctx.base_bundle_params
    c = ctx.params.c
    direction = c / abs(c) if c != 0 else 1j
    top = min(LADDER_TOP, 2 * cfg.u_radius)
    ladder = [ctx.base.with_c(top / 2 ** k * direction) for k in range(4)] + [ctx.base]
    values = []
    for params in ladder:
        curve = curve_sample(params, bp, [0], (0.0, math.pi / 2), 200, cfg, SHADOW_DEPTH, BUFFER, workers=ctx.workers)
        values.append(curve_dilatation(curve))
    monotone = all(b <= a * 1.05 for a, b in zip(values, values[1:]))
    ok = values[0] <= 1.5 and abs(values[-1] - 1) <= 1e-9 and monotone
    return ok, f"K along |c|={top:.3g}/2^k: " + ", ".join(f"{k:.4g}" for k in values)


# --- render ---

def check_render(ctx: SuiteContext) -> CheckResult:
    """Depth monotonicity, annulus containment and agreement with backward samples"""
    if not ctx.bounds.valid:
        return True, "skipped: no trapping annulus"
    params, b = ctx.params, ctx.bounds
    tol = 0.01
    vp = default_viewport(b, 32)
    shallow = membership_grid(params, vp, 6, b, tol, workers=ctx.workers)
    deep = membership_grid(params, vp, 7, b, tol, workers=ctx.workers)
    if np.any(deep.surviving & ~shallow.surviving):
        return False, "surviving set grew with depth"
    moduli = np.abs(vp.centers())[deep.surviving]
    slack = vp.half_diagonal
    if np.any(moduli < b.R_c * (1 - tol) - slack) or np.any(moduli > b.s_c * (1 + tol) + slack):
        return False, "surviving pixel outside the annulus"

    samples = inverse_ifs_sample(params, 2000, 100, ctx.seed, b)
    again = inverse_ifs_sample(params, 2000, 100, ctx.seed, b)
    if not np.array_equal(samples, again):
        return False, "backward sampler is not deterministic"
    mod = np.abs(samples)
    if np.any(mod < b.R_c - 0.05) or np.any(mod > b.s_c + 0.05):
        return False, "backward samples leave the annulus"
    fine = default_viewport(b, 64)
    grid = membership_grid(params, fine, 12, b, tol, workers=ctx.workers)
    cells = [fine.pixel_of(complex(z)) for z in samples]
    hits = sum(1 for cell in cells if cell is not None and grid.data[cell] == 255)
    share = hits / len(samples)
    return hits == len(samples), f"{share:.1%} of backward samples on surviving pixels"


def check_circle_render(ctx: SuiteContext) -> CheckResult:
    """At c = 0 the raster is every pixel the unit circle crosses, up to one pixel of the band"""
    base, tol = ctx.base, 0.01
    b = annulus_bounds(base)
    vp = default_viewport(b, 128)
    grid = membership_grid(base, vp, 24, b, tol, workers=ctx.workers)
    crossed = {vp.pixel_of(cmath.exp(1j * a)) for a in np.linspace(0.0, 2 * math.pi, 2048, endpoint=False)}
    missing = sum(1 for cell in crossed if grid.data[cell] != 255)
    moduli = np.abs(vp.centers())[grid.surviving]
    stray = int(np.count_nonzero(np.abs(moduli - 1) > tol + vp.half_diagonal + 1e-12))
    return missing == 0 and stray == 0, f"{len(crossed)} circle pixels, {missing} missing, {stray} outside the band"


def check_dual_sampler(ctx: SuiteContext) -> CheckResult:
    """Forward chaos game stays in the attracting region"""
    b = ctx.bounds
    limit = b.R_c if b.valid else b.escape_radius
    points = dual_ifs_sample(ctx.params, 500, ctx.seed, grid=default_grid(8), workers=ctx.workers)
    return bool(np.all(np.abs(points) <= limit)), f"500 points within |z| <= {limit:.6g}"


def check_julia_distance(ctx: SuiteContext) -> CheckResult:
    """Distance of sampled J_c from the unit circle shrinks with |c|"""
    c = ctx.params.c
    if c == 0:
        return True, "skipped at c = 0"
    ladder = [4 * c / 2 ** k for k in range(4)]
    distances = []
    for ck in ladder:
        params = ctx.params.with_c(ck)
        bounds = annulus_bounds(params)
        if not bounds.valid:
            return True, f"skipped: no trapping annulus at c={ck}"
        samples = inverse_ifs_sample(params, 2000, 100, ctx.seed, bounds)
        distances.append(float(np.max(np.abs(np.abs(samples) - 1))))
    ok = all(b < a for a, b in zip(distances, distances[1:]))
    return ok, "distances " + ", ".join(f"{d:.3g}" for d in distances)


CHECKS: List[Tuple[str, Callable[[SuiteContext], CheckResult]]] = [
    ("Image/preimage duality", check_image_preimage_duality),
    ("Translation identity", check_translation_identity),
    ("Branch derivative", check_branch_derivative),
    ("Image separation", check_image_separation),
    ("Escape invariance", check_escape_invariance),
    ("Annulus roots", check_annulus_roots),
    ("Periodic points", check_periodic_points),
    ("Attracting cycles", check_attracting_cycles),
    ("Bundle encoding", check_bundle_encoding),
    ("Bundle metric", check_metric),
    ("Bundle sections", check_sections),
    ("Locally eventually onto", check_mixing),
    ("Angle maps", check_theta_consistency),
    ("Solenoid constructions", check_solenoid_constructions),
    ("Solenoid injectivity", check_solenoid_injectivity),
    ("Deck transform", check_deck_transform),
    ("Motion conjugacy", check_motion_identity_and_conjugacy),
    ("Motion regularity", check_motion_regularity),
    ("Branched motion", check_branched_motion),
    ("Curve leaf", check_curve),
    ("Dilatation ladder", check_dilatation_ladder),
    ("Survival render", check_render),
    ("Circle render", check_circle_render),
    ("Dual sampler", check_dual_sampler),
    ("Julia distance", check_julia_distance),
]


def run_suite(params: CorrespondenceParams, seed: int = 0, workers: int = 1) -> List[Tuple[bool, str, str]]:
    """Run every check, recording exceptions as failures"""
    ctx = SuiteContext(params, seed=seed, workers=workers)
    results = []
    for name, check in CHECKS:
        try:
            passed, message = check(ctx)
        except Exception as exc:
            logger.exception("check %s raised", name)
            passed, message = False, f"Error: {exc}"
        results.append((bool(passed), name, message))
    return results


def print_report(results: List[Tuple[bool, str, str]], params: CorrespondenceParams) -> int:
    """Print a check-by-check report; 0 when everything passed, else 1"""
    print("\n" + "=" * 60)
    print(f"INVARIANT SUITE  p={params.p} q={params.q} c={params.c}")
    print("=" * 60 + "\n")
    for passed, name, message in results:
        print(f"{'✅' if passed else '❌'} {name}")
        print(f"   {message}\n")
    print("=" * 60)
    if all(passed for passed, _, _ in results):
        print("✅ ALL CHECKS PASSED")
        print("=" * 60 + "\n")
        return 0
    failed = sum(1 for passed, _, _ in results if not passed)
    print(f"❌ {failed} CHECK(S) FAILED")
    print("=" * 60 + "\n")
    return 1
