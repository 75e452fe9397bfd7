import cmath
import math

import numpy as np
import pytest
from pydantic import ValidationError

from corrdyn.errors import BranchPointError, DegenerateSampleError, InvalidPairError
from corrdyn.schemas import CorrespondenceParams
from corrdyn.services.correspondence import (
    annulus_bounds,
    branch_derivative,
    branch_image,
    branch_label,
    escape_radius,
    estimate_expansion,
    images,
    images_array,
    preimage_branch,
    preimage_label,
    preimages,
    preimages_array,
    satisfies,
)


def test_params_require_p_above_q():
    """p must exceed q"""
    with pytest.raises(ValidationError):
        CorrespondenceParams(p=2, q=2, c=0)
    with pytest.raises(ValidationError):
        CorrespondenceParams(p=3, q=0, c=0)


def test_images_of_one_on_the_circle(circle_params):
    """(w)^2 = 1 gives the images 1 and -1"""
    assert images(circle_params, 1) == [1, -1]


def test_images_at_zero_integer_mode(figure_params):
    """In integer mode 0 maps to c only"""
    assert images(figure_params, 0) == [0.2j]
    assert branch_image(figure_params, 0, 1) == 0.2j


def test_branch_point_in_fractional_mode(fractional_params):
    """0 is a branch point for non-integer p/q"""
    with pytest.raises(BranchPointError):
        branch_image(fractional_params, 0, 0)


def test_preimage_at_c_is_a_branch_point(figure_params):
    """w = c has no labelled preimages"""
    with pytest.raises(BranchPointError):
        preimage_branch(figure_params, 0.2j, 0)


def test_branch_index_out_of_range(circle_params):
    """Branch indices are checked"""
    with pytest.raises(ValueError):
        branch_image(circle_params, 1, 2)
    with pytest.raises(ValueError):
        preimage_branch(circle_params, 1, 6)


def test_every_pair_satisfies_the_relation(figure_params):
    """Images and preimages solve (w - c)^q = z^p"""
    for z in (0.7 + 0.3j, -1.1 + 0.2j, 0.4 - 0.9j):
        for w in images(figure_params, z):
            assert satisfies(figure_params, z, w)
        for zeta in preimages(figure_params, z):
            assert satisfies(figure_params, zeta, z)


def test_duality(fractional_params):
    """z is a preimage of each of its images"""
    z = 0.8 + 0.5j
    for w in images(fractional_params, z):
        assert min(abs(zeta - z) for zeta in preimages(fractional_params, w)) < 1e-12


def test_translation_identity(figure_params):
    """Shifting w and c together leaves the preimages unchanged"""
    w = 0.3 + 1.1j
    shifted = figure_params.with_c(0.5)
    a = preimages(figure_params, w)
    b = preimages(shifted, w - figure_params.c + shifted.c)
    assert np.allclose(a, b, atol=1e-12, rtol=0)


def test_image_separation(circle_params):
    """q images are at least 2 sin(pi/q)|z|^(p/q) apart"""
    z = 1.3 * cmath.exp(0.4j)
    a, b = images(circle_params, z)
    assert abs(a - b) >= 2 * math.sin(math.pi / 2) * abs(z) ** 3 - 1e-9


def test_labels_recover_indices(figure_params):
    """branch_label and preimage_label invert the indexed branches"""
    z = 0.9 - 0.2j
    for k in range(figure_params.q):
        assert branch_label(figure_params, z, branch_image(figure_params, z, k)) == k
    for j in range(figure_params.p):
        assert preimage_label(figure_params, z, preimage_branch(figure_params, z, j)) == j


def test_label_rejects_unrelated_pair(circle_params):
    """Labels require a valid pair"""
    with pytest.raises(InvalidPairError):
        branch_label(circle_params, 1, 2)


def test_branch_derivative_matches_differences(figure_params):
    """(p/q)(w - c)/z against central differences"""
    h = 1e-6
    rng = np.random.Generator(np.random.PCG64(3))
    for _ in range(50):
        z = cmath.rect(rng.uniform(0.5, 2.0), rng.uniform(-math.pi, math.pi))
        k = int(rng.integers(2))
        w = branch_image(figure_params, z, k)
        exact = branch_derivative(figure_params, z, w)
        numeric = (branch_image(figure_params, z + h, k) - branch_image(figure_params, z - h, k)) / (2 * h)
        assert abs(exact - numeric) / abs(exact) < 1e-6


def test_branch_derivative_at_zero(figure_params, fractional_params):
    """The derivative vanishes at 0 in integer mode and is undefined otherwise"""
    assert branch_derivative(figure_params, 0, 0.2j) == 0
    with pytest.raises(BranchPointError):
        branch_derivative(fractional_params, 0, 0)


def test_branch_image_overflow(circle_params):
    """Moduli beyond the floating range raise OverflowError"""
    with pytest.raises(OverflowError):
        branch_image(circle_params, 1e200, 0)


def test_vectorised_images_match(figure_params):
    """images_array and preimages_array agree with the scalar versions"""
    z = np.array([0.5 + 0.5j, -1.2 + 0.1j])
    assert np.allclose(images_array(figure_params, z)[1], images(figure_params, z[1]))
    assert np.allclose(preimages_array(figure_params, z)[0], preimages(figure_params, z[0]))
    assert images_array(figure_params, z).shape == (2, 2)


def test_annulus_bounds_figure_parameter(figure_params):
    """Bisection radii at c = 0.2i"""
    b = annulus_bounds(figure_params)
    assert b.valid
    assert b.r_c == pytest.approx(0.2092, abs=1e-3)
    assert b.R_c == pytest.approx(0.8790, abs=1e-3)
    assert b.s_c == pytest.approx(math.sqrt(1.2), abs=1e-12)
    assert b.s_c == pytest.approx(1.09545, abs=1e-5)


def test_annulus_bounds_at_zero(circle_params):
    """c = 0 gives the limit values"""
    b = annulus_bounds(circle_params)
    assert (b.r_c, b.R_c, b.s_c, b.valid) == (0.0, 1.0, 1.0, True)


def test_annulus_bounds_invalid(escaping_params):
    """|c| = 1 leaves no trapping annulus"""
    b = annulus_bounds(escaping_params)
    assert not b.valid
    assert math.isnan(b.r_c) and math.isnan(b.R_c)


def test_escape_radius_golden_ratio(escaping_params):
    """x^2 - x - 1 has its root at the golden ratio"""
    assert escape_radius(escaping_params) == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-8)
    assert annulus_bounds(escaping_params).escape_radius == pytest.approx(1.6180339887, abs=1e-8)


def test_escape_beyond_s_c(figure_params):
    """Points beyond s_c move outwards under every branch"""
    s_c = annulus_bounds(figure_params).s_c
    for angle in np.linspace(-3, 3, 13):
        z = cmath.rect(s_c * 1.001, angle)
        assert all(abs(w) > abs(z) for w in images(figure_params, z))


def test_expansion_on_the_circle(circle_params):
    """Forward branches triple, inverse branches divide by three"""
    samples = [cmath.exp(1j * a) for a in np.linspace(0, 6, 20)]
    estimate = estimate_expansion(circle_params, samples, radius=1e-6)
    assert estimate.inverse_min == pytest.approx(3.0)
    assert estimate.backward_max == pytest.approx(1 / 3)
    assert estimate.expanding


def test_expansion_rejects_degenerate_samples(figure_params):
    """Samples must avoid 0 and c"""
    with pytest.raises(DegenerateSampleError):
        estimate_expansion(figure_params, [], radius=1e-6)
    with pytest.raises(DegenerateSampleError):
        estimate_expansion(figure_params, [0.2j + 1e-9], radius=1e-6)
