"""Brute-force dense 2^N operators used to certify the fermionic shortcuts.

Capped at ``MAX_SITES`` sites; nothing here is meant to scale.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .chain import ChainSpec
from .exceptions import InvalidArgumentError, ResourceLimitError
from .fock import PureState

MAX_SITES = 10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
LOWER = 0.5 * (X - 1j * Y)  # |1><0|, the creation factor
RAISE = 0.5 * (X + 1j * Y)  # |0><1|
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


@dataclass(frozen=True, eq=False)
class DenseOperator:
    n_sites: int
    entries: np.ndarray

    def __matmul__(self, other):
        if isinstance(other, DenseOperator):
            return DenseOperator(self.n_sites, self.entries @ other.entries)
        if isinstance(other, PureState):
            return PureState(self.n_sites, self.entries @ other.amplitudes)
        return NotImplemented

    @property
    def dag(self) -> "DenseOperator":
        return DenseOperator(self.n_sites, self.entries.conj().T)


def _guard(n_sites):
    if n_sites > MAX_SITES:
        raise ResourceLimitError(f"dense oracle limited to {MAX_SITES} sites, got {n_sites}")


def site_operator(n_sites: int, ops: dict) -> np.ndarray:
    """Kronecker product with ``ops[n]`` on 1-based site ``n`` (identity elsewhere).

    Site 1 is the rightmost Kronecker factor, matching the index convention.
    """
    _guard(n_sites)
    factors = [ops.get(n, I2) for n in range(n_sites, 0, -1)]
    return reduce(np.kron, factors)


def pauli(n_sites: int, label: str, site: int) -> np.ndarray:
    return site_operator(n_sites, {site: PAULI[label]})


def dense_hamiltonian(spec: ChainSpec) -> DenseOperator:
    N = spec.n_sites
    _guard(N)
    h = np.zeros((1 << N, 1 << N), dtype=complex)
    for i, J in enumerate(spec.couplings, start=1):
        h += 0.5 * J * (site_operator(N, {i: X, i + 1: X}) + site_operator(N, {i: Y, i + 1: Y}))
    for i, B in enumerate(spec.fields, start=1):
        h -= B * pauli(N, "Z", i)
    return DenseOperator(N, h)


def dense_unitary(H: DenseOperator, t: float) -> DenseOperator:
    w, v = np.linalg.eigh(H.entries)
    return DenseOperator(H.n_sites, (v * np.exp(-1j * w * t)) @ v.conj().T)


def dense_evolve(H: DenseOperator, state, t: float):
    """Exact ``exp(-iHt)`` applied to a `PureState` or a raw amplitude vector."""
    _guard(H.n_sites)
    U = dense_unitary(H, t).entries
    if isinstance(state, PureState):
        return PureState(state.n_sites, U @ state.amplitudes)
    return U @ np.asarray(state)


def dense_jw_operator(n_sites: int, ops) -> DenseOperator:
    """Product of fermion operators in the written order.

    ``ops`` is a sequence of ``(kind, site)`` with ``kind`` in ``{"+", "-"}``
    (creation / annihilation); the leftmost entry is the leftmost factor.
    """
    _guard(n_sites)
    out = np.eye(1 << n_sites, dtype=complex)
    for kind, site in ops:
        if not 1 <= site <= n_sites:
            raise InvalidArgumentError(f"site {site} outside 1..{n_sites}")
        local = {m: Z for m in range(1, site)}
        local[site] = LOWER if kind == "+" else RAISE
        out = out @ site_operator(n_sites, local)
    return DenseOperator(n_sites, out)


def creation(n_sites: int, site: int) -> np.ndarray:
    return dense_jw_operator(n_sites, [("+", site)]).entries


def annihilation(n_sites: int, site: int) -> np.ndarray:
    return dense_jw_operator(n_sites, [("-", site)]).entries


def number_operator(n_sites: int) -> np.ndarray:
    """``sum_i Z_i`` conserved quantity (as a dense matrix)."""
    return sum(pauli(n_sites, "Z", i) for i in range(1, n_sites + 1))
