import json
import os

import pytest

_FIXTURE_PATH = os.path.join(os.path.dirname(__file__), "fixtures",
                             "reference_values.json")


@pytest.fixture(scope="session")
def ref():
    """Frozen high-precision reference values (generated ahead of the build)."""
    with open(_FIXTURE_PATH) as fh:
        return json.load(fh)
