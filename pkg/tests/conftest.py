import pytest

from spartan_st import ModelParams


def reference(d=1, mu=0.0, eta1=1.0, dtilde=1.0):
    """eta0 = 1, eta1 = 1, xi = 3, D~ = 1 unless overridden."""
    return ModelParams.from_dtilde(d, 1.0, eta1, 3.0, dtilde, mu=mu)


@pytest.fixture
def ref1():
    return reference(1)


@pytest.fixture
def ref3():
    return reference(3)
