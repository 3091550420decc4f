import pytest

from cheblab.explicit import ZeroDatabase
from cheblab.sieve import build_table


@pytest.fixture(scope="session")
def table_1e5():
    return build_table(10**5)


@pytest.fixture(scope="session")
def table_1e6():
    return build_table(10**6)


@pytest.fixture(scope="session")
def table_1e7():
    return build_table(10**7)


@pytest.fixture(scope="session")
def zero_db():
    return ZeroDatabase(height=100.0)


def brute_primes(n):
    return [p for p in range(2, n + 1) if all(p % d for d in range(2, int(p**0.5) + 1))]
