import numpy as np
import pytest

from stablelv.model import ModelParams
from stablelv.presets import canonical, subcase_params


@pytest.fixture(scope="session")
def params_valid():
    return ModelParams(a2=1.0, b2=1.0, x0=1.0, y0=1.0, theta1=1.5, theta2=1.5)


@pytest.fixture(scope="session")
def params_partial():
    return canonical("partial_extinction")


@pytest.fixture(scope="session")
def params_sure():
    return canonical("sure_extinction")


@pytest.fixture(scope="session")
def params_no_ext():
    return canonical("no_extinction")


def fd_partials(f, x, y):
    """Central finite-difference partials with relative steps."""
    hx = 1e-5 * max(1.0, abs(x)) if abs(x) >= 1.0 else 1e-5 * abs(x)
    hy = 1e-5 * max(1.0, abs(y)) if abs(y) >= 1.0 else 1e-5 * abs(y)
    dx = (f.value(x + hx, y) - f.value(x - hx, y)) / (2 * hx)
    dy = (f.value(x, y + hy) - f.value(x, y - hy)) / (2 * hy)
    dxx = (f.value(x + hx, y) - 2 * f.value(x, y) + f.value(x - hx, y)) / hx ** 2
    dyy = (f.value(x, y + hy) - 2 * f.value(x, y) + f.value(x, y - hy)) / hy ** 2
    return dx, dy, dxx, dyy


def assert_partials_match(f, x, y, rtol=1e-5):
    fdx, fdy, fdxx, fdyy = fd_partials(f, x, y)
    scale1 = abs(f.value(x, y)) + 1.0
    for got, want ,label in ((f.dx(x, y), fdx, "dx"), (f.dy(x, y), fdy, "dy")):
        assert abs(float(got) - want) <= rtol * (abs(want) + scale1), \
            f"{f.family} {label} at ({x}, {y}): analytic {got} vs fd {want}"
    # second differences lose ~3 digits to roundoff
    for got, want, label in ((f.dxx(x, y), fdxx, "dxx"), (f.dyy(x, y), fdyy, "dyy")):
        assert abs(float(got) - want) <= 100 * rtol * (abs(want) + scale1), \
            f"{f.family} {label} at ({x}, {y}): analytic {got} vs fd {want}"
