import numpy as np
import pytest

from mirrorchain.chain import build_uniform_pst

# lines appended by test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def chain10():
    return build_uniform_pst(10)


def random_state(rng, n_sites, normalise=True):
    from mirrorchain.fock import PureState

    v = rng.normal(size=1 << n_sites) + 1j * rng.normal(size=1 << n_sites)
    if normalise:
        v /= np.linalg.norm(v)
    return PureState(n_sites, v)


def random_chain(rng, n_sites, fields=True):
    from mirrorchain.chain import ChainSpec

    J = rng.uniform(0.3, 2.0, size=n_sites - 1)
    B = rng.normal(scale=0.5, size=n_sites) if fields else np.zeros(n_sites)
    return ChainSpec(n_sites, J, B, rng.uniform(0.5, 3.0))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
