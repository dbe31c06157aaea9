from __future__ import annotations

import pytest

from pbm_analytics.ingest import generate_synthetic_with_truth

from support import SCENARIO_PROFILE


@pytest.fixture(scope="session")
def scenario():
    """The frozen synthetic dataset with planted effects, plus its truth."""
    return generate_synthetic_with_truth(SCENARIO_PROFILE)
