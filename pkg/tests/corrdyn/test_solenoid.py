import cmath
import math

import numpy as np
import pytest

from corrdyn.errors import CapExceededError, ParameterError, ShortSequenceError
from corrdyn.schemas import BundleParams, TorusPoint
from corrdyn.services.solenoid import (
    TWO_PI,
    deck_transform,
    nearest_distance,
    quotient_equal,
    random_addresses,
    symbolic_angles,
    symbolic_point,
    symbolic_to_torus,
    theta,
    torus_iterate,
    torus_iterate_arrays,
    torus_map,
)


def test_theta_is_not_reduced(circle_params):
    """p t / q + 2 pi k / q"""
    assert theta(circle_params, 1, 0.5) == pytest.approx(1.5 + math.pi)
    assert theta(circle_params, 0, 10.0) == pytest.approx(30.0)


def test_symbolic_angles_keep_exact_turns(circle_params):
    """Each angle is a residue plus an integer number of 2 pi q turns"""
    angles = symbolic_angles(circle_params, 1.0, [0, 1, 0], 3)
    assert angles[0] == (1.0, 0)
    exact = 1.0
    for k, (a, m) in zip([0, 1, 0], angles[1:]):
        exact = theta(circle_params, k, exact)
        assert 0 <= a < TWO_PI * 2
        assert a + TWO_PI * 2 * m == pytest.approx(exact, rel=1e-12)


def test_torus_map_from_the_core(circle_params, circle_bundle):
    """u_0(1, 0) = (1, r)"""
    x = torus_map(circle_bundle, circle_params, 0, TorusPoint(t=0.0, disk=0j))
    assert x.t == 0
    assert x.disk == pytest.approx(circle_bundle.r)
    y = torus_map(circle_bundle, circle_params, 3, TorusPoint(t=0.0, disk=0j))
    assert y.t == pytest.approx(math.pi)


def test_torus_map_arguments(circle_params, circle_bundle):
    """Indices run over 0..p-1 and r + delta must not exceed 1"""
    with pytest.raises(ParameterError):
        torus_map(circle_bundle, circle_params, 6, TorusPoint(t=0.0, disk=0j))
    with pytest.raises(ParameterError):
        torus_map(BundleParams(r=0.9, delta=0.2), circle_params, 0, TorusPoint(t=0.0, disk=0j))


def test_torus_point_stays_in_the_disk():
    """Fiber coordinates outside the unit disk are rejected"""
    with pytest.raises(ValueError):
        TorusPoint(t=0.0, disk=1.5)


def test_fixed_point_of_u0(circle_params, small_bundle):
    """u_0 has the fixed point (1, r / (1 - delta))"""
    x = TorusPoint(t=0.0, disk=0j)
    for _ in range(40):
        x = torus_map(small_bundle, circle_params, 0, x)
    assert x.t == 0
    assert x.disk == pytest.approx(0.5 / 0.9, abs=1e-15)


def test_iterate_order(circle_params, circle_bundle):
    """Entry k1 * p + k2 is u_k2(u_k1(x))"""
    x = TorusPoint(t=0.4, disk=0.1j)
    t, disk = torus_iterate_arrays(circle_bundle, circle_params, [x], 2)
    assert t.shape == (36,) and disk.shape == (36,)
    for k1 in range(6):
        for k2 in range(6):
            y = torus_map(circle_bundle, circle_params, k2, torus_map(circle_bundle, circle_params, k1, x))
            i = k1 * 6 + k2
            assert cmath.exp(1j * t[i]) == pytest.approx(cmath.exp(1j * y.t), abs=1e-12)
            assert disk[i] == pytest.approx(y.disk, abs=1e-12)


def test_iterate_cap_and_depth(circle_params, circle_bundle):
    """Clouds above the cap and negative depths are refused"""
    cloud = [TorusPoint(t=0.0, disk=0j)]
    with pytest.raises(CapExceededError):
        torus_iterate_arrays(circle_bundle, circle_params, cloud, 2, cap=10)
    with pytest.raises(ParameterError):
        torus_iterate_arrays(circle_bundle, circle_params, cloud, -1)


def test_iterate_zero_steps(circle_params, circle_bundle):
    """n = 0 returns the cloud"""
    cloud = [TorusPoint(t=0.2, disk=0.3), TorusPoint(t=1.0, disk=0j)]
    points = torus_iterate(circle_bundle, circle_params, cloud, 0)
    assert points == cloud


def test_iterate_stays_in_the_torus(circle_params, circle_bundle):
    """All images keep |disk| <= r / (1 - delta)"""
    points = torus_iterate(circle_bundle, circle_params, [TorusPoint(t=0.0, disk=1.0)], 3)
    assert len(points) == 216
    bound = circle_bundle.delta ** 3 + circle_bundle.r / (1 - circle_bundle.delta)
    assert all(abs(x.disk) <= bound + 1e-12 for x in points)


def test_symbolic_point_matches_torus(circle_params, circle_bundle):
    """g(t, tau) and its torus realisation share the base angle and series"""
    for t, tau in random_addresses(circle_params, 20, 8, seed=5):
        g = symbolic_point(circle_bundle, circle_params, t, tau, 8)
        x = symbolic_to_torus(circle_bundle, circle_params, t, tau, 8)
        assert x.t == pytest.approx(t)
        assert g.base == pytest.approx(cmath.exp(1j * t), abs=1e-15)
        assert abs(g.series - x.disk) < 1e-9


def test_symbolic_point_is_an_orbit(circle_params, circle_bundle):
    """Consecutive angles are related by the correspondence"""
    g = symbolic_point(circle_bundle, circle_params, 0.3, [1, 0, 1, 1], 4)
    pts = g.orbit.points
    for z, w in zip(pts, pts[1:]):
        assert abs(w ** 2 - z ** 6) < 1e-12
    assert g.tail_bound == pytest.approx(circle_bundle.r * circle_bundle.delta ** 4 / (1 - circle_bundle.delta))


def test_symbolic_point_arguments(circle_bundle, figure_params, circle_params):
    """c must be 0, the address long enough and its symbols in 0..q-1"""
    with pytest.raises(ParameterError):
        symbolic_point(circle_bundle, figure_params, 0.0, [0, 0], 2)
    with pytest.raises(ShortSequenceError):
        symbolic_point(circle_bundle, circle_params, 0.0, [0], 2)
    with pytest.raises(ParameterError):
        symbolic_point(circle_bundle, circle_params, 0.0, [0, 2], 2)


def test_deck_transform_identity(fractional_params):
    """No turns leaves the address unchanged"""
    tau = [0, 1, 1, 0, 1]
    assert deck_transform(fractional_params, tau, 0) == tau


def test_deck_transform_relabels(fractional_params, small_bundle):
    """g(t + 2 pi, tau') equals g(t, tau)"""
    tau = [0, 1, 1, 0, 1, 0]
    shifted = deck_transform(fractional_params, tau, 1)
    assert shifted != tau
    a = symbolic_point(small_bundle, fractional_params, 0.8, tau, 6)
    b = symbolic_point(small_bundle, fractional_params, 0.8 + TWO_PI, shifted, 6)
    assert quotient_equal(a, b, 1e-9)


def test_quotient_equal_on_tuples():
    """Componentwise tolerance in C^2"""
    assert quotient_equal((1, 2j), (1 + 1e-10, 2j), 1e-9)
    assert not quotient_equal((1, 2j), (1, 2j + 1e-6), 1e-9)


def test_nearest_distance_finds_cloud_points(circle_params, circle_bundle):
    """A cloud element is at distance 0 from itself"""
    t, disk = torus_iterate_arrays(circle_bundle, circle_params, [TorusPoint(t=0.0, disk=0j)], 2)
    points = [(cmath.exp(1j * t[7]), disk[7]), (cmath.exp(1j * t[20]), disk[20])]
    assert np.allclose(nearest_distance(t, disk, points), 0, atol=1e-12)


def test_random_addresses_are_reproducible(circle_params):
    """Same seed, same addresses"""
    a = random_addresses(circle_params, 10, 6, seed=1)
    assert a == random_addresses(circle_params, 10, 6, seed=1)
    assert a != random_addresses(circle_params, 10, 6, seed=2)
    assert all(0 <= t < TWO_PI and len(tau) == 6 and set(tau) <= {0, 1} for t, tau in a)
