import numpy as np
import pytest

from mirrorchain import kernels
from mirrorchain.oracle import annihilation, creation, dense_hamiltonian

from conftest import random_chain

BACKENDS = kernels.available_backends()


@pytest.fixture(params=sorted(BACKENDS))
def impl(request):
    return BACKENDS[request.param]


def test_active_backend_is_listed():
    assert kernels.BACKEND in BACKENDS


def test_compiled_backend_built():
    # the editable install builds the extension unless MIRRORCHAIN_NO_EXT is set
    assert "cython" in BACKENDS


@pytest.mark.parametrize("N", [1, 3, 6])
def test_jw_apply_matches_dense(impl, rng, N):
    amps = rng.normal(size=1 << N) + 1j * rng.normal(size=1 << N)
    for site in range(1, N + 1):
        np.testing.assert_allclose(impl.jw_apply(amps, site - 1, True), creation(N, site) @ amps,
                                   atol=1e-13)
        np.testing.assert_allclose(impl.jw_apply(amps, site - 1, False),
                                   annihilation(N, site) @ amps, atol=1e-13)


def test_jw_apply_accepts_read_only_input(impl):
    amps = np.zeros(8, complex)
    amps[0] = 1
    amps.setflags(write=False)
    out = impl.jw_apply(amps, 1, True)
    assert out[2] == 1 and np.count_nonzero(out) == 1


@pytest.mark.parametrize("N,k", [(4, 0), (4, 2), (6, 3), (7, 1)])
def test_sector_states_popcount(impl, N, k):
    states = np.asarray(impl.sector_states(N, k))
    assert len(states) == len(set(states.tolist()))
    assert all(bin(int(s)).count("1") == k for s in states)
    from math import comb
    assert len(states) == comb(N, k)


@pytest.mark.parametrize("N", [3, 5, 6])
def test_sector_hamiltonian_is_dense_block(impl, rng, N):
    spec = random_chain(rng, N)
    H = dense_hamiltonian(spec).entries
    for k in range(N + 1):
        states = np.asarray(impl.sector_states(N, k))
        block = impl.sector_hamiltonian(N, states, spec.couplings, spec.fields)
        np.testing.assert_allclose(block, H[np.ix_(states, states)], atol=1e-13)


def test_backends_agree(rng):
    if len(BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    N = 8
    amps = rng.normal(size=1 << N) + 1j * rng.normal(size=1 << N)
    for site in range(N):
        for create in (True, False):
            np.testing.assert_array_equal(py.jw_apply(amps, site, create), cy.jw_apply(amps, site, create))
    spec = random_chain(rng, N)
    for k in range(N + 1):
        s_py, s_cy = py.sector_states(N, k), cy.sector_states(N, k)
        np.testing.assert_array_equal(np.asarray(s_py), np.asarray(s_cy))
        np.testing.assert_allclose(py.sector_hamiltonian(N, s_py, spec.couplings, spec.fields),
                                   cy.sector_hamiltonian(N, s_cy, spec.couplings, spec.fields),
                                   atol=1e-14)


def _run_cli(tmp_path, env_extra):
    import json
    import os
    import subprocess
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "chain": {"n_sites": 8},
        "errors": [{"kind": "pauli_z", "site": 3, "time_fraction": 0.4}],
        "encoding": {"D": 3},
        "pipeline": {"samples": 3, "seed": 1},
    }))
    out = tmp_path / ("out-" + "-".join(env_extra.values() or ["default"]))
    env = {**os.environ, **env_extra}
    proc = subprocess.run(["mirrorchain", "protect", "--config", str(cfg), "--out", str(out)],
                          env=env, capture_output=True, text=True)
    return proc, out


def test_pure_fallback_end_to_end(tmp_path):
    import subprocess
    import sys
    code = "from mirrorchain import kernels; print(kernels.BACKEND)"
    env = {"MIRRORCHAIN_PURE": "1", "PATH": ""}
    proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert proc.stdout.strip() == "python"
    fast, a = _run_cli(tmp_path, {})
    pure, b = _run_cli(tmp_path, {"MIRRORCHAIN_PURE": "1"})
    assert fast.returncode == 0 and pure.returncode == 0, pure.stderr
    # both backends are exact, so the per-sample results agree to rounding
    import csv
    ra = list(csv.DictReader((a / "protect.csv").open()))
    rb = list(csv.DictReader((b / "protect.csv").open()))
    for x, y in zip(ra, rb):
        assert abs(float(x["fidelity"]) - float(y["fidelity"])) < 1e-12
