import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from drivercost.config import PipelineConfig


@pytest.fixture
def cfg() -> PipelineConfig:
    return PipelineConfig(rng_seed=123)
