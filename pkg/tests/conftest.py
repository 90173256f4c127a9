import gmpy2
import pytest
from gmpy2 import mpfr

from kgcoulomb._mp import precision


@pytest.fixture(autouse=True)
def _comparison_precision():
    # library code sets its own precision; this only affects arithmetic in the tests
    with precision(200):
        yield


@pytest.fixture(scope="session")
def sqrt6():
    with precision(200):
        return gmpy2.sqrt(mpfr(6))
