import pytest

from prpoint.curves import Curve


def curve_37a():
    return Curve(0, 0, 1, -1, 0, conductor=37)


def curve_43a():
    return Curve(0, 1, 1, 0, 0, conductor=43)


def curve_53a():
    return Curve(1, -1, 1, 0, 0, conductor=53)


def curve_11a():
    return Curve(0, -1, 1, -10, -20, conductor=11)


@pytest.fixture(scope="session")
def e37():
    return curve_37a()


@pytest.fixture(scope="session")
def e43():
    return curve_43a()


@pytest.fixture(scope="session")
def e53():
    return curve_53a()


@pytest.fixture(scope="session")
def e11():
    return curve_11a()
