import os
from pathlib import Path
from typing import Tuple

from dotenv import load_dotenv


class Config:
    """Singleton configuration class for the analysis toolkit."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(Config, cls).__new__(cls)
            cls._instance._load_config()
        return cls._instance

    def _load_config(self):
        """Load configuration from .env file."""
        # Load .env file from the project root
        # Search upwards from current file to find project root
        current = Path(__file__).resolve()
        for parent in current.parents:
            env_path = parent / ".env"
            if env_path.exists():
                load_dotenv(dotenv_path=env_path)
                break
        else:
            # Fallback: try loading from current working directory
            load_dotenv()

        # Environment settings
        self.env = os.getenv("ENV", "local")
        self.log_level = os.getenv("LOG_LEVEL", "INFO").upper()
        self.output_dir = Path(os.getenv("OUTPUT_DIR", "out"))
        self.random_seed = int(os.getenv("RANDOM_SEED", "20240501"))

        # Exact arithmetic settings
        self.lp_margin_tol = float(os.getenv("LP_MARGIN_TOL", "1e-9"))
        self.rational_max_denominator = int(os.getenv("RATIONAL_MAX_DENOMINATOR", str(10**6)))
        self.structural_exhaustive_max = int(os.getenv("STRUCTURAL_EXHAUSTIVE_MAX", "3"))
        self.period_search_max_nodes = int(os.getenv("PERIOD_SEARCH_MAX_NODES", "200000"))

        # Numerical integration settings
        self.tube_delta = float(os.getenv("TUBE_DELTA", "0.1"))
        self.epsilons = self._parse_floats(os.getenv("EPSILONS", "0.45,0.35,0.25"))
        self.sample_margin = float(os.getenv("SAMPLE_MARGIN", "0.2"))
        self.ode_method = os.getenv("ODE_METHOD", "DOP853")
        self.ode_rtol = float(os.getenv("ODE_RTOL", "1e-10"))
        self.ode_atol = float(os.getenv("ODE_ATOL", "1e-300"))
        self.ode_max_step = float(os.getenv("ODE_MAX_STEP", "1.0"))
        self.poincare_time_budget = float(os.getenv("POINCARE_TIME_BUDGET", "5000"))
        self.event_tol = float(os.getenv("EVENT_TOL", "1e-12"))

        # Execution settings
        self.parallel_workers = int(os.getenv("PARALLEL_WORKERS", "1"))

    @staticmethod
    def _parse_floats(raw: str) -> Tuple[float, ...]:
        return tuple(float(item) for item in raw.split(",") if item.strip())

    def is_ci(self) -> bool:
        """Check if running in CI environment."""
        return os.getenv("CI", "false").lower() == "true"


# Singleton instance
config = Config()
