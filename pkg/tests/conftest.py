import numpy as np
import pytest

from isoprofile import _backend
from isoprofile.model import make_params
from isoprofile.shooting import assemble_closed_profile, find_delta_star

from isoprofile.verify import REPRESENTATIVES  # noqa: F401


@pytest.fixture(scope="session")
def p445():
    return make_params(4, 4, 5)


@pytest.fixture(scope="session")
def star445(p445):
    return find_delta_star(p445, 1e-8)


@pytest.fixture(scope="session")
def profile445(p445, star445):
    return assemble_closed_profile(p445, star445.delta_star)


@pytest.fixture(params=_backend.available())
def backend(request):
    """Run a test once per importable kernel backend."""
    before = _backend.name_active
    _backend.set_backend(request.param)
    yield request.param
    _backend.set_backend(before)


@pytest.fixture
def rng():
    return np.random.default_rng(20251016)
