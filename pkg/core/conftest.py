import numpy as np
import pytest

from core.config import config
from core.logger import log


@pytest.fixture(scope="session")
def random_seed() -> int:
    """Session seed for randomised property checks, taken from RANDOM_SEED."""
    log.info(f"Property checks seeded with {config.random_seed}")
    return config.random_seed


@pytest.fixture(scope="function")
def rng(random_seed: int) -> np.random.Generator:
    """
    Function-scoped numpy generator.

    Each test gets a fresh generator so results do not depend on test order.
    """
    return np.random.default_rng(random_seed)


@pytest.fixture(scope="function")
def output_dir(tmp_path):
    """Per-test artifact directory."""
    path = tmp_path / "out"
    path.mkdir()
    return path


@pytest.fixture(scope="function", autouse=True)
def test_logging(request):
    """
    Automatically log test start and end for every test.
    Note: Package conftest files may override this with more detailed logging.
    """
    test_name = request.node.name
    log.info(f"Starting test: {test_name}")

    yield

    log.info(f"Completed test: {test_name}")
