import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from twostage import interim_review_instance, midterm_instance


@pytest.fixture(scope="session")
def midterm():
    return midterm_instance()


@pytest.fixture(scope="session")
def interim_review():
    return interim_review_instance()
