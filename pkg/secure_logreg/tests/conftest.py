"""
Shared fixtures for the secure regression tests
"""
import os

import numpy as np
import pytest

from secure_logreg.data import SyntheticSpec, generate_synthetic
from secure_logreg.field import FieldModulus
from secure_logreg.protocol import ProtocolConfig
from secure_logreg.sharing import SharingParams

RUN_SLOW = os.environ.get("SECURE_LOGREG_RUN_SLOW") == "1"


def pytest_collection_modifyitems(config, items):
    for item in items:
        if "slow" in item.keywords and not RUN_SLOW:
            item.add_marker(pytest.mark.skip(reason="Long run; set SECURE_LOGREG_RUN_SLOW=1"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def modulus():
    return FieldModulus((1 << 127) - 1)


@pytest.fixture
def small_modulus():
    return FieldModulus(97)


@pytest.fixture
def params_2_of_3():
    return SharingParams(t=2, w=3)


@pytest.fixture
def consortium():
    """3 institutions, 600 rows, d=4"""
    datasets, beta = generate_synthetic(SyntheticSpec(d=4, sizes=(250, 200, 150), seed=3))
    return datasets, beta


@pytest.fixture
def cfg():
    return ProtocolConfig(lam=1.0, sharing=SharingParams(2, 3), rng_seed=7)
