"""Error identification by probing with the empty and the filled boundary.

Both probes simulate the chain with the error, take the decoding-region
reduced state at the transfer time, post-select one excitation sector and
read the span of its support as decoding-region mode coefficients.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec
from .decoder import error_branches, run_errors
from .encoder import Constraints
from .fock import DensityMatrix, PureState, apply_create, reduced_density
from .linalg import gram_schmidt

EIG_RTOL = 1e-9
WEIGHT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ProbeReport:
    """Result of one probe.

    ``span`` rows are orthonormal mode-coefficient vectors over the ``D``
    decoding sites (local order).  For the vacuum probe a row ``g`` is the state
    ``sum_j g_j f_j^dag |0>``; for the filled probe it is ``sum_j g_j f_j |1...1>``.
    """

    kind: str
    D: int
    sector: int
    density: DensityMatrix
    eigenvalues: np.ndarray
    span: np.ndarray
    post_selection_weight: float
    sector_weights: np.ndarray

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "sector": self.sector,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "span": [[[float(c.real), float(c.imag)] for c in row] for row in self.span],
            "post_selection_weight": self.post_selection_weight,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def decoding_region(spec: ChainSpec, D: int) -> list:
    return list(range(spec.n_sites - D + 1, spec.n_sites + 1))


def _probe_density(initial: PureState, spec: ChainSpec, errors, D: int,
                   shots: int | None, seed: int | None) -> np.ndarray:
    region = decoding_region(spec, D)
    rho = np.zeros((1 << D, 1 << D), complex)
    for p, seq in error_branches(errors):
        out = run_errors(initial, spec, seq)
        if out.is_annihilated:
            continue
        rho += p * out.norm ** 2 * reduced_density(out, region).entries
    rho = rho / np.real(np.trace(rho))
    if shots is not None:
        rho, _ = estimate_density(rho, shots, np.random.default_rng(seed))
    return rho


def _sector_report(kind, rho, D, sector, signs, tol) -> ProbeReport:
    idx = np.arange(1 << D)
    pops = np.array([bin(i).count("1") for i in idx])
    diag = np.real(np.diag(rho))
    weights = np.bincount(pops, weights=diag, minlength=D + 1)
    if sector == 1:
        basis = [1 << j for j in range(D)]
    else:
        full = (1 << D) - 1
        basis = [full ^ (1 << j) for j in range(D)]
    weight = float(weights[sector])
    empty = np.zeros((0, D), complex)
    dm = DensityMatrix(tuple(range(D)), rho)
    if weight < WEIGHT_TOL:
        return ProbeReport(kind, D, sector, dm, np.zeros(0), empty, weight, weights)
    block = rho[np.ix_(basis, basis)] / weight
    w, v = np.linalg.eigh(block)
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    keep = w > tol * w[0]
    span = (v[:, keep] * signs[:, None]).T
    return ProbeReport(kind, D, sector, dm, w[keep], span, weight, weights)


def probe_with_vacuum(spec: ChainSpec, errors, D: int, tol: float = EIG_RTOL,
                      shots: int | None = None, seed: int | None = None) -> ProbeReport:
    """Probe with ``|0...0>``; the one-excitation sector spans ``F^dag |0>`` vectors.

    With ``shots`` the decoding-region state is estimated by finite-shot
    tomography instead of read exactly; ``tol`` must then sit above the noise.
    """
    rho = _probe_density(PureState.vacuum(spec.n_sites), spec, errors, D, shots, seed)
    return _sector_report("vacuum", rho, D, 1, np.ones(D), tol)


def filled_probe_state(spec: ChainSpec, D: int) -> PureState:
    """``|1>^D |0>^(N-D)``: the encoding region filled, the rest empty."""
    state = PureState.vacuum(spec.n_sites)
    for site in range(D, 0, -1):
        state = apply_create(state, site)
    return state


def probe_with_filled(spec: ChainSpec, errors, D: int, tol: float = EIG_RTOL,
                      shots: int | None = None, seed: int | None = None) -> ProbeReport:
    """Probe with the filled encoding region; the ``D-1`` sector spans ``F |1...1>``.

    The hole at local site ``j`` equals ``(-1)^(j-1) f_j |1...1>`` (JW string of
    the ``j - 1`` filled sites below it), which fixes the coefficient signs.
    """
    rho = _probe_density(filled_probe_state(spec, D), spec, errors, D, shots, seed)
    signs = np.array([(-1.0) ** j for j in range(D)])
    return _sector_report("filled", rho, D, D - 1, signs, tol)


def spans_to_constraints(v0: ProbeReport, v1: ProbeReport, angle_tol: float = 1e-10) -> Constraints:
    """Epsilon rows (eta = 0 form) enforcing ``{q^dag, F} = 0`` for every probed mode.

    A vacuum-probe row ``g`` is the state of ``F^dag``, so ``F`` has
    coefficients ``conj(g)``; a filled-probe row already holds ``F``'s
    coefficients.  Rows are reversed into encoding-slot order and deduplicated.
    """
    D = v0.D
    rows = [np.conj(g)[::-1] for g in v0.span] + [np.asarray(g)[::-1] for g in v1.span]
    sources = [("vacuum", k) for k in range(len(v0.span))] + [("filled", k) for k in range(len(v1.span))]
    if rows:
        gs = gram_schmidt(np.array(rows), tol=angle_tol)
        eps = gs.basis
        sources = [sources[k] for k in gs.kept]
    else:
        eps = np.zeros((0, D), complex)
    return Constraints(D, eps, np.zeros((0, D), complex), tuple(sources))


def row_span_residual(rows: np.ndarray, span_rows: np.ndarray) -> float:
    """Largest relative distance of a row of ``rows`` from ``span(span_rows)``."""
    rows = np.atleast_2d(rows)
    if rows.size == 0:
        return 0.0
    if span_rows.size == 0:
        return 1.0
    Q = gram_schmidt(span_rows, tol=1e-12).basis
    worst = 0.0
    for r in rows:
        nrm = np.linalg.norm(r)
        if nrm == 0:
            continue
        resid = r - (Q.conj() @ r) @ Q
        worst = max(worst, float(np.linalg.norm(resid) / nrm))
    return worst


# -- finite-shot tomography --------------------------------------------------------

_ROT = {
    "X": np.array([[1, 1], [1, -1]], complex) / np.sqrt(2),
    "Y": np.array([[1, -1j], [1, 1j]], complex) / np.sqrt(2),
    "Z": np.eye(2, dtype=complex),
}
_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], complex),
    "Y": np.array([[0, -1j], [1j, 0]], complex),
    "Z": np.diag([1.0, -1.0]).astype(complex),
}


def _kron_sites(mats):
    """Kronecker product with the first entry on the least-significant qubit."""
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(m, out)
    return out


def _psd_projection(rho: np.ndarray) -> np.ndarray:
    """Closest unit-trace PSD matrix in Frobenius norm (eigenvalue simplex projection)."""
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.nonzero(u - css / np.arange(1, len(u) + 1) > 0)[0][-1]
    shift = css[k] / (k + 1)
    w = np.clip(w - shift, 0.0, None)
    return (v * w) @ v.conj().T


@dataclass(frozen=True, eq=False)
class TomographyResult:
    density: DensityMatrix
    inversion_residual: float


def estimate_density(rho: np.ndarray, shots: int, rng) -> tuple[np.ndarray, float]:
    """Pauli-basis finite-shot estimate of ``rho`` (see `sampled_tomography`)."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    outcome_bits = (np.arange(dim)[:, None] >> np.arange(n)) & 1
    sums, counts = {}, {}
    for setting in itertools.product("XYZ", repeat=n):
        V = _kron_sites([_ROT[b] for b in setting])
        probs = np.clip(np.real(np.diag(V @ rho @ V.conj().T)), 0.0, None)
        freq = rng.multinomial(shots, probs / probs.sum()) / shots
        for mask in itertools.product((0, 1), repeat=n):
            label = "".join(b if m else "I" for b, m in zip(setting, mask))
            parity = outcome_bits[:, np.array(mask, bool)].sum(axis=1) % 2
            val = float(freq @ (1 - 2 * parity))
            sums[label] = sums.get(label, 0.0) + val
            counts[label] = counts.get(label, 0) + 1
    est = np.zeros((dim, dim), complex)
    for label, total in sums.items():
        est += (total / counts[label]) * _kron_sites([_PAULI[c] for c in label])
    est /= dim
    proj = _psd_projection(est)
    return proj, float(np.linalg.norm(proj - est))


def sampled_tomography(state: PureState, region, shots: int | None = None,
                       seed: int | None = None) -> TomographyResult:
    """Estimate the reduced state on ``region`` from Pauli-basis counts.

    Every one of the ``3^n`` settings is measured ``shots`` times; Pauli
    expectations are averaged over compatible settings, inverted linearly and
    projected onto the density-matrix set.  ``shots=None`` returns the exact
    reduced state.  ``inversion_residual`` is the Frobenius distance removed by
    the projection.
    """
    exact = reduced_density(state, region)
    if shots is None:
        return TomographyResult(exact, 0.0)
    rho, resid = estimate_density(exact.entries, shots, np.random.default_rng(seed))
    return TomographyResult(DensityMatrix(exact.region, rho), resid)
