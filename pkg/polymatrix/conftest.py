import pytest

from core.logger import log
from polymatrix.analysis import Analysis
from polymatrix.test_data import fish_document

# Note: Fixtures from core/conftest.py are automatically discovered by pytest


@pytest.fixture(scope="session")
def fish() -> Analysis:
    """
    The bundled fish network, analysed once per session.

    Stages are cached on the object, so tests that need the branch map pay
    for the enumeration once.
    """
    return Analysis.from_document(fish_document())


@pytest.fixture(scope="session")
def fish_game(fish):
    return fish.game


@pytest.fixture(scope="session")
def fish_complex(fish):
    return fish.complex


@pytest.fixture(scope="session")
def fish_character(fish):
    return fish.character


@pytest.fixture(scope="session")
def fish_graph(fish):
    return fish.graph


@pytest.fixture(scope="session")
def fish_map(fish):
    """π_S for S = {γ1}."""
    return fish.skeleton_map


@pytest.fixture(scope="session")
def fish_hamiltonian(fish):
    return fish.hamiltonian


@pytest.fixture(scope="session")
def fish_level(fish):
    """Level functional η fixed by the declared level equilibrium."""
    return fish.level_functional


@pytest.fixture(scope="function", autouse=True)
def log_test_info(request):
    """
    Log every polymatrix test with its module.

    Runs alongside the basic test_logging fixture from core conftest.
    """
    test_name = request.node.name
    test_module = request.node.module.__name__

    log.info("=" * 80)
    log.info(f"POLYMATRIX TEST: {test_module}::{test_name}")
    log.info("=" * 80)

    yield

    log.info(f"COMPLETED: {test_name}")
    log.info("=" * 80)
