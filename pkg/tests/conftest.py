import pytest

from bundlewalk.contour import Contour
from bundlewalk.geometry import Bundle, Plane, bundle_point


@pytest.fixture
def bundle():
    """Three parallel planes at offsets 0, 1, 2 plus the default transversal."""
    b = Bundle()
    for offset in (0.0, 1.0, 2.0):
        b.add_parallel(offset)
    b.add_transversal()
    return b


def build_contour(plane: Plane, zs, walker: int = 0) -> Contour:
    c = Contour(walker)
    for k, z in enumerate(zs):
        c.append(bundle_point(plane, complex(z)), interval=k - 1)
    return c


@pytest.fixture
def make_contour():
    return build_contour
