import numpy as np
import pytest

from tvshape import SyntheticSpec, generate


@pytest.fixture(scope="session")
def recon_signal():
    """The 3-harmonic reconstruction test signal with its ground truth."""
    return generate(SyntheticSpec("tv_reconstruction"))


@pytest.fixture()
def rng():
    # function-scoped: every test draws the same stream regardless of order
    return np.random.default_rng(20240811)
