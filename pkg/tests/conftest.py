import json
import os

import pytest

from discwalk import AlphaSpec, resolve_alpha

PINNED_PATH = os.path.join(os.path.dirname(__file__), "pinned.json")


@pytest.fixture(scope="session")
def golden():
    return resolve_alpha(AlphaSpec(preset="golden"))


@pytest.fixture(scope="session")
def sqrt2m1():
    return resolve_alpha(AlphaSpec(preset="sqrt2m1"))


@pytest.fixture(scope="session")
def pinned():
    """Pilot-recorded reference values; regenerated only deliberately."""
    with open(PINNED_PATH) as f:
        return json.load(f)
