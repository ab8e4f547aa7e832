"""Engineered spin chains and their single-excitation propagator.

The spin Hamiltonian is

    H = 1/2 sum_i J_i (X_i X_{i+1} + Y_i Y_{i+1}) - sum_i B_i Z_i

with |1> the excitation.  Projected on the one-excitation states |n> it gives
``H1[n, n+1] = J_n`` and ``H1[n, n] = 2 B_n - sum_m B_m``.  The constant
``-sum_m B_m`` is the vacuum energy; keeping it makes ``H1`` the literal
one-excitation block of the dense operator, which is what ``propagator``
exponentiates.  Fermionic mode dynamics use the shifted matrix
(``hopping_matrix``), i.e. the block minus the vacuum energy.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .exceptions import InvalidArgumentError, NotPSTError

PST_TOL = 1e-10


@dataclass(frozen=True)
class ChainSpec:
    """Immutable description of an ``N``-site XX chain.

    ``transfer_phase`` is ``None`` until the spec has been verified.
    """

    n_sites: int
    couplings: tuple
    fields: tuple
    transfer_time: float
    transfer_phase: float | None = None
    scheme: str = field(default="explicit", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "couplings", tuple(float(j) for j in self.couplings))
        object.__setattr__(self, "fields", tuple(float(b) for b in self.fields))
        object.__setattr__(self, "transfer_time", float(self.transfer_time))
        if self.n_sites < 2:
            raise InvalidArgumentError(f"chain needs N >= 2 sites, got {self.n_sites}")
        if len(self.couplings) != self.n_sites - 1:
            raise InvalidArgumentError(
                f"expected {self.n_sites - 1} couplings, got {len(self.couplings)}")
        if len(self.fields) != self.n_sites:
            raise InvalidArgumentError(
                f"expected {self.n_sites} fields, got {len(self.fields)}")
        if any(j <= 0 for j in self.couplings):
            raise InvalidArgumentError("all couplings must be positive")
        if not self.transfer_time > 0:
            raise InvalidArgumentError("transfer time must be positive")

    @property
    def phase(self) -> float:
        """Transfer phase, computing it on demand for unverified specs."""
        if self.transfer_phase is not None:
            return self.transfer_phase
        return verify_pst(self)

    @property
    def vacuum_energy(self) -> float:
        return -float(sum(self.fields))

    def to_dict(self) -> dict:
        return {
            "n_sites": self.n_sites,
            "couplings": list(self.couplings),
            "fields": list(self.fields),
            "transfer_time": self.transfer_time,
            "transfer_phase": self.transfer_phase,
            "scheme": self.scheme,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "ChainSpec":
        if data.get("scheme") == "uniform_pst" and "couplings" not in data:
            return build_uniform_pst(int(data["n_sites"]))
        spec = cls(
            n_sites=int(data["n_sites"]),
            couplings=data["couplings"],
            fields=data.get("fields", [0.0] * int(data["n_sites"])),
            transfer_time=data["transfer_time"],
            transfer_phase=data.get("transfer_phase"),
            scheme=data.get("scheme", "explicit"),
        )
        return spec

    @classmethod
    def from_json(cls, text: str) -> "ChainSpec":
        return cls.from_dict(json.loads(text))


def build_uniform_pst(N: int, verify: bool = True) -> ChainSpec:
    """Standard engineered chain ``J_n = sqrt(n (N - n))``, ``B = 0``, ``t_f = pi/2``.

    The transfer phase is measured with `verify_pst` and stored on the spec
    (skipped when ``verify`` is false).
    """
    if N < 2:
        raise InvalidArgumentError(f"chain needs N >= 2 sites, got {N}")
    n = np.arange(1, N)
    spec = ChainSpec(
        n_sites=N,
        couplings=np.sqrt(n * (N - n)),
        fields=[0.0] * N,
        transfer_time=np.pi / 2,
        scheme="uniform_pst",
    )
    if not verify:
        return spec
    phi = verify_pst(spec, PST_TOL)
    return replace(spec, transfer_phase=phi)


def single_excitation_hamiltonian(spec: ChainSpec) -> np.ndarray:
    N = spec.n_sites
    h = np.zeros((N, N), dtype=complex)
    idx = np.arange(N - 1)
    h[idx, idx + 1] = spec.couplings
    h[idx + 1, idx] = spec.couplings
    h[np.arange(N), np.arange(N)] = 2.0 * np.asarray(spec.fields) + spec.vacuum_energy
    return h


def hopping_matrix(spec: ChainSpec) -> np.ndarray:
    """One-body matrix of the fermionic Hamiltonian (vacuum energy removed)."""
    return single_excitation_hamiltonian(spec) - spec.vacuum_energy * np.eye(spec.n_sites)


@lru_cache(maxsize=64)
def _eigh(spec: ChainSpec, fermionic: bool):
    h = hopping_matrix(spec) if fermionic else single_excitation_hamiltonian(spec)
    w, v = np.linalg.eigh(h)
    return w, v


@dataclass(frozen=True, eq=False)
class BetaMatrix:
    time: float
    entries: np.ndarray

    def __getitem__(self, nm):
        """1-based access ``beta[n, m]``."""
        n, m = nm
        return self.entries[n - 1, m - 1]


def _exp(spec: ChainSpec, t: float, fermionic: bool) -> np.ndarray:
    w, v = _eigh(spec, fermionic)
    out = (v * np.exp(-1j * w * t)) @ v.conj().T
    out.setflags(write=False)
    return out


def propagator(spec: ChainSpec, t: float) -> BetaMatrix:
    """``beta(t) = exp(-i H1 t)`` by Hermitian eigendecomposition; ``t`` may be negative."""
    return BetaMatrix(float(t), _exp(spec, float(t), fermionic=False))


def mode_propagator(spec: ChainSpec, t: float) -> np.ndarray:
    """Propagator of the hopping matrix.

    ``U(t) a_m^dag U(t)^dag = sum_n M[n, m] a_n^dag`` with ``M = mode_propagator(spec, t)``.
    Differs from `propagator` only by the vacuum phase ``exp(i sum(B) t)``.
    """
    return _exp(spec, float(t), fermionic=True)


def mode_phase(spec: ChainSpec) -> float:
    """Phase acquired by a single fermionic mode over the transfer time."""
    return float(np.angle(mode_propagator(spec, spec.transfer_time)[-1, 0]))


def verify_pst(spec: ChainSpec, tol: float = PST_TOL) -> float:
    """Check ``beta_{N-n+1,n}(t_f) = exp(i phi)`` for every ``n`` and return ``phi``.

    Raises
    ------
    NotPSTError
        If any mirror amplitude differs from the common phase factor by ``tol``
        or more; the exception carries the worst site.
    """
    beta = propagator(spec, spec.transfer_time).entries
    N = spec.n_sites
    mirror = beta[np.arange(N)[::-1], np.arange(N)]
    phi = float(np.angle(mirror[0]))
    dev = np.abs(mirror - np.exp(1j * phi))
    worst = int(np.argmax(dev))
    if dev[worst] >= tol:
        raise NotPSTError(
            f"mirror amplitude at site {worst + 1} deviates by {dev[worst]:.3e} "
            f"(|beta| = {abs(mirror[worst]):.6f})",
            site=worst + 1,
            deviation=float(dev[worst]),
        )
    return phi


def mirror_deviation(spec: ChainSpec) -> float:
    """Largest ``|beta_{N-n+1,n}(t_f) - exp(i phi_1)|`` over all sites."""
    beta = propagator(spec, spec.transfer_time).entries
    N = spec.n_sites
    mirror = beta[np.arange(N)[::-1], np.arange(N)]
    return float(np.max(np.abs(mirror - np.exp(1j * np.angle(mirror[0])))))
