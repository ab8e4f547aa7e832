import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from mirrorchain.chain import (BetaMatrix, ChainSpec, build_uniform_pst, hopping_matrix,
                               mirror_deviation, mode_phase, mode_propagator, propagator,
                               single_excitation_hamiltonian, verify_pst)
from mirrorchain.exceptions import InvalidArgumentError, NotPSTError
from mirrorchain.oracle import dense_hamiltonian

from conftest import random_chain

# beta_{N,1}(pi/2) for the engineered chain, computed with scipy.linalg.expm
# on the explicit tridiagonal matrix (independent of the eigh path)
FROZEN_MIRROR = {2: -1j, 3: -1.0, 4: 1j, 6: -1j, 8: 1j}
# |beta_{4,1}(pi/2)| of the unengineered N=4, J=1 chain (expm)
UNIFORM_J1_N4 = 0.4411609728809329


@pytest.mark.parametrize("N", sorted(FROZEN_MIRROR))
def test_mirror_amplitude_frozen(N):
    spec = build_uniform_pst(N)
    assert abs(propagator(spec, np.pi / 2)[N, 1] - FROZEN_MIRROR[N]) < 1e-12
    assert abs(np.exp(1j * spec.transfer_phase) - FROZEN_MIRROR[N]) < 1e-12


@pytest.mark.parametrize("N", [4, 8, 12])
def test_uniform_chain_mirrors_every_site(N):
    spec = build_uniform_pst(N)
    beta = propagator(spec, spec.transfer_time)
    phi = spec.transfer_phase
    for n in range(1, N + 1):
        assert abs(beta[N - n + 1, n] - np.exp(1j * phi)) < 1e-10
    assert mirror_deviation(spec) < 1e-10


def test_unengineered_chain_is_not_pst():
    spec = ChainSpec(4, [1.0, 1.0, 1.0], [0.0] * 4, np.pi / 2)
    assert abs(abs(propagator(spec, np.pi / 2)[4, 1]) - UNIFORM_J1_N4) < 1e-12
    with pytest.raises(NotPSTError) as info:
        verify_pst(spec)
    assert 1 <= info.value.site <= 4
    assert info.value.deviation > 0.1


def test_h1_is_one_excitation_block(rng):
    spec = random_chain(rng, 6)
    H = dense_hamiltonian(spec).entries
    idx = [1 << n for n in range(6)]
    np.testing.assert_allclose(single_excitation_hamiltonian(spec), H[np.ix_(idx, idx)], atol=1e-13)


def test_propagator_matches_expm(rng):
    spec = random_chain(rng, 7)
    for t in (0.3, -1.2, 2.5):
        ref = expm(-1j * single_excitation_hamiltonian(spec) * t)
        np.testing.assert_allclose(propagator(spec, t).entries, ref, atol=1e-12)
        ref = expm(-1j * hopping_matrix(spec) * t)
        np.testing.assert_allclose(mode_propagator(spec, t), ref, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 9), st.floats(-5, 5), st.floats(-5, 5))
def test_propagator_group_law(N, s, t):
    spec = build_uniform_pst(N, verify=False)
    a = propagator(spec, s).entries @ propagator(spec, t).entries
    np.testing.assert_allclose(a, propagator(spec, s + t).entries, atol=1e-10)
    U = propagator(spec, t).entries
    np.testing.assert_allclose(U.conj().T @ U, np.eye(N), atol=1e-12)


def test_mode_phase_equals_transfer_phase_without_fields():
    for N in (3, 5, 8):
        spec = build_uniform_pst(N)
        assert abs(np.exp(1j * mode_phase(spec)) - np.exp(1j * spec.transfer_phase)) < 1e-12


def test_fields_shift_mode_phase():
    base = build_uniform_pst(6)
    shifted = ChainSpec(6, base.couplings, [0.2] * 6, base.transfer_time)
    phi = verify_pst(shifted)
    # a uniform field shifts H1 by 2B - sum(B) = -0.8, the hopping matrix by 0.4
    assert abs(np.exp(1j * (phi - 0.8 * base.transfer_time)) - np.exp(1j * base.transfer_phase)) < 1e-10
    assert abs(np.exp(1j * (mode_phase(shifted) + 0.4 * base.transfer_time))
               - np.exp(1j * base.transfer_phase)) < 1e-10


@pytest.mark.parametrize("kwargs", [
    dict(n_sites=1, couplings=[], fields=[0.0], transfer_time=1.0),
    dict(n_sites=3, couplings=[1.0], fields=[0.0] * 3, transfer_time=1.0),
    dict(n_sites=3, couplings=[1.0, 1.0], fields=[0.0] * 2, transfer_time=1.0),
    dict(n_sites=3, couplings=[1.0, -1.0], fields=[0.0] * 3, transfer_time=1.0),
    dict(n_sites=3, couplings=[1.0, 1.0], fields=[0.0] * 3, transfer_time=0.0),
])
def test_invalid_specs(kwargs):
    with pytest.raises(InvalidArgumentError):
        ChainSpec(**kwargs)


def test_spec_is_immutable_and_round_trips():
    spec = build_uniform_pst(5)
    with pytest.raises(Exception):
        spec.n_sites = 6
    again = ChainSpec.from_json(spec.to_json())
    assert again == spec
    assert json.loads(spec.to_json())["n_sites"] == 5


def test_beta_matrix_one_based():
    b = BetaMatrix(0.0, np.arange(4).reshape(2, 2))
    assert b[1, 1] == 0 and b[2, 1] == 2


def test_unverified_spec_has_no_phase():
    spec = build_uniform_pst(4, verify=False)
    assert spec.transfer_phase is None
    assert abs(np.exp(1j * spec.phase) - 1j) < 1e-12
