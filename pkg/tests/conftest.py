import numpy as np
import pytest

from chiralpump.experiments import BASE_KNOBS, FIGURES, scenario_from_knobs


def random_hermitian(rng, dim, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (a + a.conj().T) / 2


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fig3a():
    return scenario_from_knobs(dict(BASE_KNOBS))


@pytest.fixture
def fig3b():
    return scenario_from_knobs({**BASE_KNOBS, "Omega0_ratio": 5.0})


@pytest.fixture
def fig5_point():
    # Omega_S/2pi = 2 MHz, Delta = Delta0, Omega0/Omega_S = 20, gammaPhi/gammaS = 30
    return scenario_from_knobs({**BASE_KNOBS, "OmegaS": 2.0, "Omega0_ratio": 20.0, "gammaPhi": 3.0})


@pytest.fixture
def fig2a():
    return scenario_from_knobs(FIGURES["fig2a"].knobs)
