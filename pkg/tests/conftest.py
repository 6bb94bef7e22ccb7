import pytest

from nanofiber_orbit.config import Config
from nanofiber_orbit.pipeline import Pipeline


@pytest.fixture(scope="session")
def pipe(tmp_path_factory):
    """Default-parameter pipeline with the dispersion table computed once per session."""
    p = Pipeline(Config(), tmp_path_factory.mktemp("session-run"), threads=4)
    p.compute_table(use_cache=False)
    return p


@pytest.fixture(scope="session")
def trap_mode(pipe):
    return pipe.trap_mode


@pytest.fixture(scope="session")
def table(pipe):
    return pipe.table


@pytest.fixture(scope="session")
def ts(pipe):
    return pipe.timescales


@pytest.fixture(scope="session")
def packet(pipe):
    return pipe.packet
