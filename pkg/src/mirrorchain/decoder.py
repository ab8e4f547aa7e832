"""Decoding unitary construction and the end-to-end transfer pipeline."""
from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .chain import ChainSpec, mode_phase
from .encoder import (EncodingPair, build_initial_state, decoded_mode_dagger,
                      region_mode, vacuum_state)
from .errmodel import KrausChannel, SystematicError, apply_error, heisenberg_mode, order_by_time
from .exceptions import DecoderConstructionError, InvalidArgumentError
from .fock import DensityMatrix, PureState, evolve, fidelity_to, reduced_density
from .linalg import canonical_basis, gram_schmidt, null_space

log = logging.getLogger(__name__)

GS_TOL = 1e-8


def error_branches(errors) -> list:
    """``[(probability, time-ordered error tuple), ...]`` for a list or a channel."""
    if isinstance(errors, KrausChannel):
        return [(p, tuple(order_by_time(seq))) for p, seq in errors.branches]
    if isinstance(errors, SystematicError):
        errors = [errors]
    return [(1.0, tuple(order_by_time(errors)))]


def _slot_sequences(seq, spec: ChainSpec, D: int):
    """Yield ``(label, [(kind, F-matrix), ...])`` for each string combination.

    Later errors act to the left, so their slots come first.
    """
    mode_cache = {}

    def F(site, t):
        key = (site, t)
        if key not in mode_cache:
            mode_cache[key] = region_mode(heisenberg_mode(spec, site, t, D).decoding_part)
        return mode_cache[key]

    per_error = [list(enumerate(e.strings)) for e in seq]
    for combo in itertools.product(*per_error):
        slots = []
        label = []
        for err, (i, string) in reversed(list(zip(seq, combo))):
            label.append(i)
            for kind, site in string.slots:
                f = F(site, err.action_time)
                slots.append((kind, f.conj().T if kind == "+" else f))
        yield tuple(reversed(label)), slots


@dataclass(frozen=True, eq=False)
class LogicalVectors:
    """Images of the two encoded states under every error branch.

    ``labels[k] = (branch, string indices, mask)`` describes row ``k`` of
    ``zero`` and ``one``.
    """

    D: int
    zero: np.ndarray
    one: np.ndarray
    labels: tuple

    @property
    def nonzero(self) -> np.ndarray:
        scale = max(np.linalg.norm(self.zero, axis=1).max(initial=0.0), 1e-300)
        return np.linalg.norm(self.zero, axis=1) > 1e-12 * scale

    def gram(self, a: int) -> np.ndarray:
        V = self.zero if a == 0 else self.one
        return V.conj() @ V.T

    def gram_difference(self) -> float:
        return float(np.abs(self.gram(0) - self.gram(1)).max(initial=0.0))

    def cross_gram(self) -> float:
        return float(np.abs(self.zero.conj() @ self.one.T).max(initial=0.0))


def build_logical_vectors(pair: EncodingPair, errors, spec: ChainSpec,
                          vacuum: PureState | None = None) -> LogicalVectors:
    """Apply every ordered product ``P_x`` of decoding-region error modes to
    ``q_a^dag |vacuum>``.

    Zero vectors are kept (with their labels); `build_decoder` skips them.
    """
    D = pair.D
    vac = (vacuum_state(pair).state if vacuum is None else vacuum).amplitudes
    enc = [decoded_mode_dagger(q, pair.phase) @ vac for q in pair.modes]
    zero, one, labels = [], [], []
    for b, (_, seq) in enumerate(error_branches(errors)):
        for strings, slots in _slot_sequences(seq, spec, D):
            for mask in itertools.product((0, 1), repeat=len(slots)):
                vs = [e.copy() for e in enc]
                for (kind, op), bit in zip(reversed(slots), reversed(mask)):
                    if bit:
                        vs = [op @ v for v in vs]
                zero.append(vs[0])
                one.append(vs[1])
                labels.append((b, strings, mask))
    lv = LogicalVectors(D, np.array(zero), np.array(one), tuple(labels))
    n_zero = int(np.sum(~lv.nonzero))
    if n_zero:
        log.debug("%d of %d logical branches vanish", n_zero, len(labels))
    return lv


def logical_vectors_from_modes(pair: EncodingPair, modes,
                               vacuum: PureState | None = None) -> LogicalVectors:
    """Logical vectors for error modes known only by their decoding-region coefficients.

    Every product over a subset of ``(F_1, ..., F_k, F_1^dag, ..., F_k^dag)``
    (in that order) is applied, which spans all polynomials in the modes.  This
    is the decoder input when the modes come from probing rather than from an
    analytic error description.
    """
    D = pair.D
    vac = (vacuum_state(pair).state if vacuum is None else vacuum).amplitudes
    enc = [decoded_mode_dagger(q, pair.phase) @ vac for q in pair.modes]
    fs = [region_mode(np.asarray(d)) for d in modes]
    slots = fs + [f.conj().T for f in fs]
    zero, one, labels = [], [], []
    for mask in itertools.product((0, 1), repeat=len(slots)):
        vs = [e.copy() for e in enc]
        for op, bit in zip(reversed(slots), reversed(mask)):
            if bit:
                vs = [op @ v for v in vs]
        zero.append(vs[0])
        one.append(vs[1])
        labels.append((0, (), mask))
    return LogicalVectors(D, np.array(zero), np.array(one), tuple(labels))


@dataclass(frozen=True, eq=False)
class DecoderUnitary:
    D: int
    entries: np.ndarray
    z: int
    basis0: np.ndarray = field(repr=False, default=None)
    basis1: np.ndarray = field(repr=False, default=None)

    @property
    def unitarity_residual(self) -> float:
        U = self.entries
        return float(np.abs(U.conj().T @ U - np.eye(U.shape[0])).max())


def build_decoder(lv: LogicalVectors, tol: float = GS_TOL) -> DecoderUnitary:
    """Map the ``r``-th orthonormalised 0-vector to ``|r>|0>_N`` and its 1-partner
    to ``|r>|1>_N``, completing the rest of the space in index order.

    The Gram-Schmidt coefficients found for the 0-set are reused verbatim on
    the 1-set.
    """
    D = lv.D
    dim = 1 << D
    keep = np.flatnonzero(lv.nonzero)
    gs = gram_schmidt(lv.zero[keep], tol)
    B0 = gs.basis
    B1 = gs.apply(lv.one[keep])
    z = B0.shape[0]
    if 2 * z > dim:
        raise DecoderConstructionError(f"{2 * z} logical directions exceed 2^D = {dim}")
    rows = np.vstack([B0, B1])
    G = rows.conj() @ rows.T
    dev = float(np.abs(G - np.eye(2 * z)).max(initial=0.0))
    if dev > 1e-8:
        raise DecoderConstructionError(f"logical sets are not jointly orthonormal ({dev:.2e})")
    half = dim >> 1
    U = np.zeros((dim, dim), complex)
    used = []
    for r in range(z):
        U[r] = B0[r].conj()
        U[r + half] = B1[r].conj()
        used += [r, r + half]
    free_targets = [i for i in range(dim) if i not in set(used)]
    if free_targets:
        comp = canonical_basis(null_space(rows.conj(), 1e-10, dim=dim)) if z else np.eye(dim, dtype=complex)
        if comp.shape[1] != len(free_targets):
            raise DecoderConstructionError("orthogonal complement has the wrong dimension")
        for target, col in zip(free_targets, comp.T):
            U[target] = col.conj()
    dec = DecoderUnitary(D, U, z, B0, B1)
    if dec.unitarity_residual > 1e-10:
        raise DecoderConstructionError(f"decoder not unitary ({dec.unitarity_residual:.2e})")
    return dec


# -- pipeline --------------------------------------------------------------------

def run_errors(state: PureState, spec: ChainSpec, seq) -> PureState:
    """Evolve to ``t_f`` applying each error of ``seq`` at its action time."""
    t = 0.0
    for err in seq:
        state = evolve(state, spec, err.action_time - t)
        state = apply_error(state, err)
        t = err.action_time
    return evolve(state, spec, spec.transfer_time - t)


def apply_decoder(state: PureState, decoder: DecoderUnitary) -> PureState:
    """``(1 (x) U_D)|state>`` on the last ``D`` sites."""
    N, D = state.n_sites, decoder.D
    m = state.amplitudes.reshape(1 << D, 1 << (N - D))
    return PureState(N, (decoder.entries @ m).reshape(-1))


@dataclass
class ProtocolReport:
    fidelity: float
    baseline_fidelity: float
    unitarity_residual: float
    gram_cross_norm: float
    z: int
    D: int
    purity: float = 1.0
    gram_difference: float = 0.0

    def to_dict(self) -> dict:
        return {
            "fidelity": self.fidelity,
            "baseline_fidelity": self.baseline_fidelity,
            "unitarity_residual": self.unitarity_residual,
            "gram_cross_norm": self.gram_cross_norm,
            "z": self.z,
            "D": self.D,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _branch_mixture(initial: PureState, spec: ChainSpec, errors, post=None) -> np.ndarray:
    N = spec.n_sites
    rho = np.zeros((2, 2), complex)
    for p, seq in error_branches(errors):
        out = run_errors(initial, spec, seq)
        if out.is_annihilated:
            continue
        if post is not None:
            out = post(out)
        rho += p * out.norm ** 2 * reduced_density(out, [N]).entries
    tr = np.real(np.trace(rho))
    return rho / tr if tr > 0 else rho


def baseline_fidelity(alpha, beta, spec: ChainSpec, errors) -> float:
    """Unencoded transfer from site 1, with the transfer phase corrected locally."""
    N = spec.n_sites
    amps = np.zeros(1 << N, complex)
    amps[0], amps[1] = alpha, beta
    rho = _branch_mixture(PureState(N, amps), spec, errors)
    target = np.array([alpha, beta * np.exp(1j * mode_phase(spec))])
    return fidelity_to(DensityMatrix((N,), rho), target)


def run_protocol(alpha, beta, spec: ChainSpec, pair: EncodingPair, errors,
                 decoder: DecoderUnitary, lv: LogicalVectors | None = None,
                 complement: PureState | None = None,
                 vacuum: PureState | None = None) -> ProtocolReport:
    """Encode, evolve with errors, decode and read site ``N``.

    Kraus channels are simulated branch by branch and mixed before reading
    the fidelity.
    """
    if decoder.D != pair.D:
        raise InvalidArgumentError(f"decoder D={decoder.D} but pair D={pair.D}")
    psi = build_initial_state(alpha, beta, pair, spec, complement, vacuum)
    rho = _branch_mixture(psi, spec, errors, post=lambda s: apply_decoder(s, decoder))
    dm = DensityMatrix((spec.n_sites,), rho)
    return ProtocolReport(
        fidelity=fidelity_to(dm, [alpha, beta]),
        baseline_fidelity=baseline_fidelity(alpha, beta, spec, errors),
        unitarity_residual=decoder.unitarity_residual,
        gram_cross_norm=lv.cross_gram() if lv is not None else float("nan"),
        z=decoder.z,
        D=decoder.D,
        purity=dm.purity,
        gram_difference=lv.gram_difference() if lv is not None else float("nan"),
    )


def random_amplitudes(rng) -> tuple[complex, complex]:
    """Haar-random qubit amplitudes."""
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return complex(v[0]), complex(v[1])
