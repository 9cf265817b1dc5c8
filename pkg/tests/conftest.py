import random

import pytest

from mcnaughton.gens import FamilyParams


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture(scope="session")
def p11():
    return FamilyParams(1, 1)
