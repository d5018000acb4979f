import numpy as np
import pytest

from lane8.realgrid import Precision

EXT = Precision.EXTENDED
STD = Precision.STANDARD


def slope(Ns, errors):
    """Least-squares slope of -log2(E) against log2(N)."""
    return -np.polyfit(np.log2(Ns), np.log2([float(e) for e in errors]), 1)[0]


@pytest.fixture(params=[STD, EXT], ids=["std", "ext"])
def precision(request):
    return request.param
