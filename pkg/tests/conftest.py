import numpy as np
import pytest

import resodyn as rd


@pytest.fixture(scope="session")
def basis32():
    return rd.build_basis(rd.Domain1D(length=1.0, quad_nodes=80), 32)


@pytest.fixture(scope="session")
def desk_problem(basis32):
    """Scalar system at resonance with the first eigenvalue."""
    return rd.ProblemConfig(m=1, l=1, lam=(float(basis32.mu[0]),), sigma=(0.0,))


@pytest.fixture(scope="session")
def desk_split(basis32, desk_problem):
    return rd.classify(basis32, desk_problem)


@pytest.fixture(scope="session")
def desk_field():
    return rd.make_field("arctan(40)", 1)


@pytest.fixture(scope="session")
def desk_equilibria(basis32, desk_problem, desk_split, desk_field):
    seeds = [rd.GalerkinState.unit(1, 32, 1, 2, 0.05),
             rd.GalerkinState.unit(1, 32, 1, 2, -0.05)]
    eqs = rd.find_equilibria(desk_field, basis32, desk_split, desk_problem, seeds)
    assert len(eqs) == 3  # origin and the +- pair
    return eqs


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
