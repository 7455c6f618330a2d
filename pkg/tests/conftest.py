import numpy as np
import pytest

from groupcc import IrrgConfig


def quick_irrg(seed=0, **kw):
    """Desk-scale defaults: small bootstrap budgets, everything else stock."""
    base = dict(bootstrap_global_ffe=300, bootstrap_local_ffe=500, seed=seed)
    base.update(kw)
    return IrrgConfig(**base)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
