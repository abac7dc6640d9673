import pytest

from ordfact.arith import build_sieve


@pytest.fixture(scope="session")
def sieve():
    return build_sieve(10**6)


@pytest.fixture(scope="session")
def small_sieve():
    return build_sieve(10**4)
