import cmath
import math

import pytest

from corrdyn.errors import InsufficientSamplesError, ParameterError, ShadowEscapeError, ShortOrbitError
from corrdyn.schemas import CorrespondenceParams, CurveSample, Direction, MotionConfig, OrbitSegment
from corrdyn.services.bundle import bundle_point_from_orbit
from corrdyn.services.correspondence import images, preimage_branch, preimage_label
from corrdyn.services.motion import (
    branched_motion,
    circle_samples,
    conjugacy_defect,
    curve_dilatation,
    curve_sample,
    dilatation_estimate,
    estimate_motion_config,
    hausdorff_distance,
    holomorphy_residual,
    injectivity_check,
    lift_point,
    lipschitz_estimate,
    motion_point,
    roundtrip_error,
    sector_width,
    separation,
    shadow_orbit,
)
from corrdyn.services.solenoid import random_addresses, symbolic_point

SMALL_C = 0.005j
TAU = [0, 1, 1, 0, 1, 0, 0, 1]


@pytest.fixture
def leaf_point(circle_params, circle_bundle):
    """A point of the solenoid with 30 recorded steps"""
    return symbolic_point(circle_bundle, circle_params, 0.7, TAU * 4, 30)


def test_motion_config_on_the_circle(circle_motion):
    """lam from the 5% fattened circle, eps from the spacing of sixth roots"""
    assert circle_motion.lam == pytest.approx(0.95 ** (-2 / 3) / 3, rel=1e-9)
    assert circle_motion.separation == pytest.approx(1.0)
    assert circle_motion.eps == pytest.approx(0.1)
    assert circle_motion.u_radius == pytest.approx(0.1 * (1 - circle_motion.lam) / 6)
    assert circle_motion.c0 == pytest.approx(1 / (1 - circle_motion.lam))


def test_motion_config_domain_is_checked():
    """u_radius may not exceed eps(1 - lam)/(6 ell)"""
    cfg = MotionConfig.from_eps(0.3, 0.5)
    assert cfg.u_radius == pytest.approx(0.025)
    with pytest.raises(ValueError):
        MotionConfig(eps=0.3, lam=0.5, u_radius=0.03)


def test_separation_of_one(circle_params):
    """Sixth roots of unity are 1 apart"""
    assert separation(circle_params, [1]) == pytest.approx(1.0)


def test_shadow_at_the_same_parameter(circle_params, circle_motion, leaf_point):
    """No parameter change, no motion"""
    assert shadow_orbit(circle_params, circle_params, leaf_point.orbit, circle_motion) is leaf_point.orbit


def test_shadow_is_an_orbit(circle_params, circle_motion, leaf_point):
    """The shadow solves the target relation and stays within C0 |dc|"""
    target = circle_params.with_c(SMALL_C)
    shadow = shadow_orbit(circle_params, target, leaf_point.orbit, circle_motion)
    for z, w in zip(shadow.points, shadow.points[1:]):
        assert abs((w - SMALL_C) ** 2 - z ** 6) < 1e-9
    drift = max(abs(a - b) for a, b in zip(shadow.points, leaf_point.orbit.points))
    assert drift <= circle_motion.c0 * abs(SMALL_C) + 1e-12
    assert len(shadow.error_bounds) == 31
    assert shadow.error_bounds[-1] == pytest.approx(circle_motion.c0 * abs(SMALL_C))


def test_shadow_escape(circle_params, leaf_point):
    """A radius smaller than the drift raises ShadowEscapeError"""
    tight = MotionConfig.from_eps(1e-6, 0.35)
    with pytest.raises(ShadowEscapeError):
        shadow_orbit(circle_params, circle_params.with_c(SMALL_C), leaf_point.orbit, tight)


def test_motion_stays_in_the_family(circle_params, circle_bundle, circle_motion, leaf_point):
    """(p, q) cannot change"""
    with pytest.raises(ParameterError):
        motion_point(circle_params, CorrespondenceParams(p=5, q=2, c=0), circle_bundle, leaf_point, circle_motion, 8)


def test_motion_point_needs_a_buffer(circle_params, circle_bundle, circle_motion, leaf_point):
    """n + buffer steps must be recorded"""
    target = circle_params.with_c(SMALL_C)
    with pytest.raises(ShortOrbitError):
        motion_point(circle_params, target, circle_bundle, leaf_point, circle_motion, 12, buffer=20)
    moved = motion_point(circle_params, target, circle_bundle, leaf_point, circle_motion, 8, buffer=20)
    assert moved.orbit.length == 8
    assert moved.tail_bound > bundle_point_from_orbit(circle_bundle, moved.orbit).tail_bound


def test_motion_point_identity(circle_params, circle_bundle, circle_motion, leaf_point):
    """h_c0 is the identity"""
    assert motion_point(circle_params, circle_params, circle_bundle, leaf_point, circle_motion, 8) is leaf_point


def test_conjugacy(circle_params, circle_bundle, circle_motion, leaf_point):
    """h_c o f_c0 = f_c o h_c on the recorded orbit"""
    target = circle_params.with_c(SMALL_C)
    defect = conjugacy_defect(circle_params, target, circle_bundle, leaf_point, circle_motion, 8, buffer=20)
    assert defect <= 1e-12


def test_roundtrip(circle_params, circle_motion, leaf_point):
    """Shadowing there and back returns the orbit"""
    target = circle_params.with_c(SMALL_C)
    assert roundtrip_error(circle_params, target, leaf_point, circle_motion, 20) < 1e-9


def test_lipschitz_bound(circle_params, circle_bundle, circle_motion, leaf_point):
    """|pi h_u - pi h_v| <= C0 |u - v|"""
    cs = [0, 0.002, 0.002j, -0.003, 0.001 - 0.002j]
    estimate = lipschitz_estimate(circle_params, cs, circle_bundle, leaf_point, circle_motion, 8, buffer=20)
    assert 0 < estimate <= circle_motion.c0


def test_holomorphy(circle_params, circle_bundle, circle_motion, leaf_point):
    """The motion is holomorphic in c"""
    residual = holomorphy_residual(
        circle_params, circle_bundle, leaf_point, [0.002j, 0.002], circle_motion, 8, h_step=1e-3, buffer=20
    )
    assert residual < 1e-4


def test_lift_point_on_and_off_the_circle(circle_params, circle_bundle):
    """Circle points use the symbolic orbit, others the principal branches"""
    on = lift_point(circle_params, circle_bundle, cmath.exp(0.4j), [1], 10)
    assert on.orbit.length == 10
    assert abs(on.orbit.points[-1]) == pytest.approx(1.0)
    off = lift_point(circle_params, circle_bundle, 0.9, [1, 1], 3)
    assert off.orbit.symbols == [1, 1, 0]


def test_branched_motion(circle_params, circle_bundle, circle_motion):
    """Every lift moves z by at most C0 |c|"""
    z = cmath.exp(0.4j)
    assert branched_motion(circle_params, circle_params, circle_bundle, z, [[0]], circle_motion, 8) == [z]
    moved = branched_motion(
        circle_params, circle_params.with_c(SMALL_C), circle_bundle, z, [[0], [1], [0, 1]], circle_motion, 8, buffer=20
    )
    assert 1 <= len(moved) <= 3
    assert all(abs(w - z) <= circle_motion.c0 * abs(SMALL_C) + 1e-12 for w in moved)


def test_curve_at_zero_is_the_circle(circle_params, circle_bundle, circle_motion):
    """gamma_0(t) = e^{it} with K = 1"""
    curve = curve_sample(circle_params, circle_bundle, TAU, (0.0, math.pi), 65, circle_motion, 8, buffer=20)
    assert all(abs(z - cmath.exp(1j * t)) < 1e-14 for t, z in curve.samples)
    assert curve.metadata["certified"] and curve.metadata["contained"]
    assert curve.metadata["sector_width"] == pytest.approx(math.pi)
    assert curve_dilatation(curve) == pytest.approx(1.0, abs=1e-9)
    assert injectivity_check(curve, 1e-6)


def test_curve_near_zero(circle_params, circle_bundle, circle_motion):
    """A small parameter bends the circle by at most C0 |c| and keeps it simple"""
    target = circle_params.with_c(0.002j)
    curve = curve_sample(target, circle_bundle, TAU, (0.0, math.pi), 65, circle_motion, 8, buffer=20)
    assert curve.c == 0.002j
    assert curve.truncation == 8
    assert curve.metadata["certified"]
    assert all(abs(z - cmath.exp(1j * t)) <= circle_motion.c0 * 0.002 + 1e-12 for t, z in curve.samples)
    assert injectivity_check(curve, 1e-6)
    assert curve.metadata["sector_width"] < 2 * math.pi


def test_curve_needs_two_samples(circle_params, circle_bundle, circle_motion):
    """m >= 2"""
    with pytest.raises(ParameterError):
        curve_sample(circle_params, circle_bundle, TAU, (0.0, 1.0), 1, circle_motion, 8)


def test_dilatation_of_linear_maps():
    """Conformal maps give 1, a stretch by 1.3 and 0.7 gives their ratio"""
    grid = [complex(x, y) for x in range(5) for y in range(5)]
    conformal = [(z, (1 + 2j) * z) for z in grid]
    assert dilatation_estimate(conformal, [1.0]) == pytest.approx(1.0)
    stretched = [(z, complex(1.3 * z.real, 0.7 * z.imag)) for z in grid]
    assert dilatation_estimate(stretched, [1.0]) == pytest.approx(1.3 / 0.7)


def test_dilatation_needs_neighbours():
    """A lone sample has no stretch ratio"""
    with pytest.raises(InsufficientSamplesError):
        dilatation_estimate([(0j, 0j)], [1.0])


def test_injectivity_detects_a_return():
    """A curve coming back to an earlier point is not injective"""
    curve = CurveSample(tau=[0], c=0j, samples=[(0.0, 1 + 0j), (1.0, 1j), (2.0, -1 + 0j), (3.0, 1 + 1e-9j)], truncation=1)
    assert not injectivity_check(curve, 1e-6)


def test_sector_width():
    """Smallest sector containing the points"""
    assert sector_width([1, 1j]) == pytest.approx(math.pi / 2)
    assert sector_width(circle_samples(8)) == pytest.approx(2 * math.pi - math.pi / 4)


def test_holomorphy_decays_quadratically(circle_params, circle_bundle, circle_motion):
    """Halving the stencil step quarters the c-bar residual on random leaf points"""
    for t, tau in random_addresses(circle_params, 20, 30, seed=0):
        x = symbolic_point(circle_bundle, circle_params, t, tau, 30)
        coarse = holomorphy_residual(circle_params, circle_bundle, x, [0.002j], circle_motion, 8, h_step=1e-3, buffer=20)
        fine = holomorphy_residual(circle_params, circle_bundle, x, [0.002j], circle_motion, 8, h_step=5e-4, buffer=20)
        assert coarse <= 1e-4
        assert fine <= 2.5e-5


def test_dilatation_shrinks_with_the_parameter(circle_bundle, circle_motion):
    """K <= 1.5 at c = 0.02i, K = 1 at c = 0, and K does not grow as |c| halves"""
    values = []
    for c in [0.02j / 2 ** k for k in range(4)] + [0j]:
        curve = curve_sample(
            CorrespondenceParams(p=6, q=2, c=c), circle_bundle, [0], (0.0, math.pi / 2), 400, circle_motion, 20,
            buffer=20,
        )
        values.append(curve_dilatation(curve))
    assert values[0] <= 1.5
    assert values[-1] == pytest.approx(1.0, abs=1e-9)
    for bigger, smaller in zip(values, values[1:]):
        assert smaller <= bigger * 1.05


def test_hausdorff_distance_of_moved_points(circle_params, circle_bundle, circle_motion):
    """The moved sample stays within C0 |dc| of the original, and does not move at dc = 0"""
    points = [symbolic_point(circle_bundle, circle_params, t, tau, 30)
              for t, tau in random_addresses(circle_params, 8, 30, seed=3)]
    target = circle_params.with_c(SMALL_C)
    spread = hausdorff_distance(circle_params, target, circle_bundle, points, circle_motion, 8, buffer=20)
    assert 0 < spread <= circle_motion.c0 * abs(SMALL_C) + 1e-12
    assert hausdorff_distance(circle_params, circle_params, circle_bundle, points, circle_motion, 8) == 0


def test_backward_shadow_near_the_attractor(figure_params):
    """A backward orbit resting on the attracting fixed point moves with it"""
    z = figure_params.c
    for _ in range(100):
        z = figure_params.c + z ** 3
    j = preimage_label(figure_params, z, z)
    orbit = OrbitSegment(points=[z] * 31, symbols=[j] * 30, direction=Direction.BACKWARD)

    cfg = estimate_motion_config(figure_params, [z], direction=Direction.BACKWARD)
    assert cfg.lam == pytest.approx(3 * (1.05 * abs(z)) ** 2, rel=1e-9)
    dc = cfg.u_radius / 2
    target = figure_params.with_c(figure_params.c + dc)
    shadow = shadow_orbit(figure_params, target, orbit, cfg)

    assert shadow.direction == Direction.BACKWARD
    w = shadow.points
    assert max(abs(a - z) for a in w) <= cfg.c0 * dc + 1e-12
    for i, k in enumerate(shadow.symbols):
        assert min(abs(v - w[i]) for v in images(target, w[i + 1])) < 1e-12
        assert abs(preimage_branch(target, w[i], k) - w[i + 1]) < 1e-9
    assert abs(w[0] - w[1]) < 1e-12
    assert shadow.error_bounds[-1] == pytest.approx(cfg.c0 * dc)
