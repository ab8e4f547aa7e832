"""Full-register states with Jordan-Wigner fermion operators.

Bit convention (used by every module): amplitude index ``i`` encodes the
occupations, with site ``n`` (1-based) stored in bit ``n - 1``.  Site 1 is the
least-significant bit, so ``|n> = 1 << (n - 1)`` and a tensor split into the
first ``k`` sites and the rest is ``index = low + 2**k * high``.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from . import kernels
from .chain import ChainSpec
from .exceptions import InvalidArgumentError

log = logging.getLogger(__name__)

NORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PureState:
    """State vector of length ``2**n_sites``; may be unnormalised."""

    n_sites: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n_sites,):
            raise InvalidArgumentError(
                f"expected {1 << self.n_sites} amplitudes, got shape {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def vacuum(cls, n_sites: int) -> "PureState":
        amps = np.zeros(1 << n_sites, dtype=complex)
        amps[0] = 1.0
        return cls(n_sites, amps)

    @classmethod
    def basis(cls, n_sites: int, occupied) -> "PureState":
        """Spin basis state with the given 1-based sites set to |1>."""
        amps = np.zeros(1 << n_sites, dtype=complex)
        amps[occupation_index(occupied)] = 1.0
        return cls(n_sites, amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm - 1.0) < NORM_TOL

    @property
    def is_annihilated(self) -> bool:
        return self.norm == 0.0

    def normalized(self) -> "PureState":
        nrm = self.norm
        if nrm == 0.0:
            raise InvalidArgumentError("cannot normalise the zero vector")
        if abs(nrm - 1.0) >= NORM_TOL:
            log.debug("normalising state with norm %.6e", nrm)
        return PureState(self.n_sites, self.amplitudes / nrm)

    def sector_weights(self) -> np.ndarray:
        """Squared norm carried by each excitation number ``k = 0..N``."""
        pops = _popcounts(self.n_sites)
        return np.bincount(pops, weights=np.abs(self.amplitudes) ** 2,
                           minlength=self.n_sites + 1)

    def tensor(self, other: "PureState") -> "PureState":
        """``self`` on the low sites, ``other`` on the sites after them."""
        amps = np.kron(other.amplitudes, self.amplitudes)
        return PureState(self.n_sites + other.n_sites, amps)

    def __add__(self, other):
        return PureState(self.n_sites, self.amplitudes + other.amplitudes)

    def __sub__(self, other):
        return PureState(self.n_sites, self.amplitudes - other.amplitudes)

    def __rmul__(self, scalar):
        return PureState(self.n_sites, scalar * self.amplitudes)

    def vdot(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_json(self) -> str:
        return json.dumps({
            "convention": "bit n-1 of the index is the occupation of site n",
            "n_sites": self.n_sites,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        })

    @classmethod
    def from_json(cls, text: str) -> "PureState":
        data = json.loads(text)
        amps = np.array([complex(re, im) for re, im in data["amplitudes"]])
        return cls(int(data["n_sites"]), amps)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    region: tuple
    entries: np.ndarray

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.entries))


def occupation_index(occupied) -> int:
    idx = 0
    for n in occupied:
        idx |= 1 << (n - 1)
    return idx


@lru_cache(maxsize=32)
def _popcounts(n_sites: int) -> np.ndarray:
    idx = np.arange(1 << n_sites)
    out = np.zeros(1 << n_sites, dtype=np.int64)
    for b in range(n_sites):
        out += (idx >> b) & 1
    out.setflags(write=False)
    return out


def _check_site(state: PureState, site: int):
    if not 1 <= site <= state.n_sites:
        raise InvalidArgumentError(f"site {site} outside 1..{state.n_sites}")


def apply_create(state: PureState, site: int) -> PureState:
    """``a_site^dag |state>`` with sign ``(-1)^(occupied sites below site)``."""
    _check_site(state, site)
    return PureState(state.n_sites, kernels.jw_apply(state.amplitudes, site - 1, True))


def apply_annihilate(state: PureState, site: int) -> PureState:
    _check_site(state, site)
    return PureState(state.n_sites, kernels.jw_apply(state.amplitudes, site - 1, False))


def apply_mode(state: PureState, coeffs, dagger: bool = False) -> PureState:
    """Apply ``sum_m c_m a_m`` (or ``sum_m conj(c_m) a_m^dag`` when ``dagger``)."""
    coeffs = np.asarray(coeffs)
    out = np.zeros_like(state.amplitudes)
    for m, c in enumerate(coeffs):
        if c == 0:
            continue
        if dagger:
            out += np.conj(c) * kernels.jw_apply(state.amplitudes, m, True)
        else:
            out += c * kernels.jw_apply(state.amplitudes, m, False)
    return PureState(state.n_sites, out)


@lru_cache(maxsize=128)
def _sector(spec: ChainSpec, k: int):
    states = kernels.sector_states(spec.n_sites, k)
    h = kernels.sector_hamiltonian(spec.n_sites, states, spec.couplings, spec.fields)
    w, v = np.linalg.eigh(h)
    return states, w, v


def sector_hamiltonian(spec: ChainSpec, k: int):
    """Basis states and spin Hamiltonian block of the ``k``-excitation sector."""
    states = kernels.sector_states(spec.n_sites, k)
    return states, kernels.sector_hamiltonian(spec.n_sites, states, spec.couplings, spec.fields)


def evolve(state: PureState, spec: ChainSpec, duration: float) -> PureState:
    """``exp(-i H duration) |state>``, one excitation sector at a time."""
    if state.n_sites != spec.n_sites:
        raise InvalidArgumentError("state and chain sizes differ")
    amps = state.amplitudes
    out = np.zeros_like(amps)
    weights = state.sector_weights()
    for k in range(spec.n_sites + 1):
        if weights[k] == 0.0:
            continue
        states, w, v = _sector(spec, k)
        coeffs = v.conj().T @ amps[states]
        out[states] = v @ (np.exp(-1j * w * duration) * coeffs)
    return PureState(state.n_sites, out)


def _as_matrix(state: PureState, region) -> np.ndarray:
    """Reshape amplitudes to (region index, complement index)."""
    N = state.n_sites
    region = list(region)
    rest = [n for n in range(1, N + 1) if n not in region]
    # numpy axis j of the C-order reshape holds bit N-1-j, i.e. site N-j
    tensor = state.amplitudes.reshape((2,) * N)
    axes_region = [N - n for n in reversed(region)]
    axes_rest = [N - n for n in reversed(rest)]
    mat = np.transpose(tensor, axes_region + axes_rest)
    return mat.reshape(1 << len(region), 1 << len(rest))


def reduced_density(state: PureState, region) -> DensityMatrix:
    """Partial trace onto ``region``.

    Region qubits keep their listed order: the first listed site is the
    least-significant bit of the returned matrix index.
    """
    region = tuple(int(n) for n in region)
    if not region:
        raise InvalidArgumentError("region must contain at least one site")
    if len(set(region)) != len(region):
        raise InvalidArgumentError("region sites must be distinct")
    for n in region:
        _check_site(state, n)
    m = _as_matrix(state, region)
    rho = m @ m.conj().T
    tr = np.real(np.trace(rho))
    if tr > 0:
        rho = rho / tr
    return DensityMatrix(region, rho)


def fidelity_to(dm: DensityMatrix, target) -> float:
    """``<chi|rho|chi>`` for a single-site density matrix."""
    if len(dm.region) != 1:
        raise InvalidArgumentError("fidelity_to needs a single-site density matrix")
    chi = np.asarray(target, dtype=complex)
    chi = chi / np.linalg.norm(chi)
    return float(np.clip(np.real(np.vdot(chi, dm.entries @ chi)), 0.0, 1.0))


def sector_dimension(n_sites: int, k: int) -> int:
    return comb(n_sites, k)
