import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from telegraph_market.model import ModelParams


@pytest.fixture
def asym_params() -> ModelParams:
    """Asymmetric two-regime market used across the suite."""
    return ModelParams(
        c_plus=0.5, c_minus=-0.3, lambda_plus=2.0, lambda_minus=1.5,
        h_plus=-0.2, h_minus=0.4, r_plus=0.08, r_minus=0.05,
        s0=100.0, sigma0=+1,
    )


@pytest.fixture
def asym_params_minus(asym_params) -> ModelParams:
    """Same market started in the low-velocity regime (atom out of the money)."""
    from dataclasses import replace

    return replace(asym_params, sigma0=-1)
