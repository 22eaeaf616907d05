import numpy as np
import pytest

from vlimit.domain import DomainConfig
from vlimit.pipeline import ExperimentConfig, build_expansion
from vlimit.prandtl0 import PrandtlConfig

SMALL = DomainConfig(Nx=32, Ny=129, y_max=16.0, Y_max=20.0, NY=201, T=0.1, Nt=20)


def small_config(**kw) -> ExperimentConfig:
    return ExperimentConfig(domain=SMALL, t_eval=0.1, prandtl=PrandtlConfig(substeps=2, ramp_steps=8), **kw)


@pytest.fixture(scope="session")
def small_expansion():
    return build_expansion(small_config())


@pytest.fixture(scope="session")
def small_error(small_expansion):
    from vlimit.error_term import build_error
    return build_error(small_expansion, 0.05, Ye=None)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
