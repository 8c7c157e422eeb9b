import pytest

from walkbound import build_measure, load_fixture


@pytest.fixture(scope="session")
def srw_measure():
    return build_measure(load_fixture("srw-f2"))


@pytest.fixture(scope="session")
def semidirect_measure():
    return build_measure(load_fixture("semidirect-linear"))


@pytest.fixture(scope="session")
def mixed_measure():
    return build_measure(load_fixture("semidirect-mixed"))


@pytest.fixture(scope="session")
def product_measure():
    return build_measure(load_fixture("direct-product"))
