import pytest

from corrdyn.schemas import BundleParams, CorrespondenceParams
from corrdyn.services.bundle import choose_bundle_params
from corrdyn.services.correspondence import annulus_bounds
from corrdyn.services.motion import circle_samples, estimate_motion_config


@pytest.fixture
def circle_params():
    """(w)^2 = z^6, the circle case"""
    return CorrespondenceParams(p=6, q=2, c=0)


@pytest.fixture
def fractional_params():
    """w^2 = z^3, non-integer exponent 3/2"""
    return CorrespondenceParams(p=3, q=2, c=0)


@pytest.fixture
def figure_params():
    """(w - 0.2i)^2 = z^6"""
    return CorrespondenceParams(p=6, q=2, c=0.2j)


@pytest.fixture
def escaping_params():
    """(w + 1)^2 = z^4, no trapping annulus"""
    return CorrespondenceParams(p=4, q=2, c=-1)


@pytest.fixture
def circle_bundle(circle_params):
    """Bundle parameters over the unit circle"""
    return choose_bundle_params(circle_params, annulus_bounds(circle_params))


@pytest.fixture
def figure_bundle(figure_params):
    """Bundle parameters at c = 0.2i"""
    return choose_bundle_params(figure_params, annulus_bounds(figure_params))


@pytest.fixture
def small_bundle():
    """Hand-picked encoding used by tests that only need r and delta"""
    return BundleParams(r=0.5, delta=0.1)


@pytest.fixture
def circle_motion(circle_params):
    """Shadowing constants measured on the unit circle"""
    return estimate_motion_config(circle_params, circle_samples(64))


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    """Keep tests in-process regardless of CORRDYN_THREADS"""
    monkeypatch.delenv("CORRDYN_THREADS", raising=False)
    yield
