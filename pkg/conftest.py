import numpy as np
import pytest
from django.conf import settings as django_settings
from hypothesis import settings as hypothesis_settings

from processors.radial_core import RadialFunction, make_grid
from processors.special_functions import Parameters

hypothesis_settings.register_profile('desk', max_examples=25, deadline=None)
hypothesis_settings.load_profile('desk')


@pytest.fixture(scope='session', autouse=True)
def configure_test_settings():
    django_settings.SECRET_KEY = "notasecret"


@pytest.fixture
def grid3():
    """Log grid used by most d=3 scenarios."""
    return make_grid(1e-3, 1e3, 256, 3)


@pytest.fixture
def fine_grid3():
    return make_grid(1e-3, 1e3, 512, 3)


@pytest.fixture
def gaussian3(grid3):
    return RadialFunction(grid3, np.exp(-grid3.nodes ** 2 / 2))


@pytest.fixture
def poisson_params():
    """d=3, alpha=1, a=0: the heat kernel is the Poisson kernel."""
    return Parameters(d=3, alpha=1.0, a=0.0)


@pytest.fixture
def hardy_params():
    return Parameters(d=3, alpha=1.0, a=1.0, s=1.0, p=2.0)


@pytest.fixture
def corridor_file(tmp_path):
    """Empty corridor fixtures file in a temporary directory."""
    path = tmp_path / 'corridors.json'
    path.write_text('{"schema_version": 1, "corridors": {}}')
    return path
