"""Systematic errors as weighted fermionic operator strings.

An `ErrorString` is ``gamma * a^dag_{c1} ... a^dag_{cm} a_{k1} ... a_{kr}``:
creators on the left, annihilators on the right, each in the listed order.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .chain import ChainSpec, mode_propagator
from .exceptions import InvalidArgumentError, UnsupportedErrorError
from .fock import PureState, apply_annihilate, apply_create

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ErrorString:
    weight: complex
    creators: tuple = ()
    annihilators: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "weight", complex(self.weight))
        object.__setattr__(self, "creators", tuple(int(s) for s in self.creators))
        object.__setattr__(self, "annihilators", tuple(int(s) for s in self.annihilators))

    @property
    def slots(self) -> tuple:
        """``(kind, site)`` pairs in written (left-to-right) order."""
        return tuple(("+", s) for s in self.creators) + tuple(("-", s) for s in self.annihilators)

    @property
    def sites(self) -> frozenset:
        return frozenset(self.creators) | frozenset(self.annihilators)


@dataclass(frozen=True)
class SystematicError:
    """A weighted sum of strings acting instantaneously at ``action_time``."""

    strings: tuple
    action_time: float
    label: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "strings", tuple(self.strings))
        object.__setattr__(self, "action_time", float(self.action_time))
        if not self.strings:
            raise InvalidArgumentError("a systematic error needs at least one string")

    @property
    def sites(self) -> frozenset:
        return frozenset().union(*(s.sites for s in self.strings))

    def validate(self, spec: ChainSpec):
        N = spec.n_sites
        for s in self.strings:
            for site in s.sites:
                if not 1 <= site <= N:
                    raise InvalidArgumentError(f"error site {site} outside 1..{N}")
        if not 0 <= self.action_time <= spec.transfer_time:
            raise InvalidArgumentError(
                f"action time {self.action_time} outside [0, t_f={spec.transfer_time}]")

    def to_dict(self) -> dict:
        return {
            "time": self.action_time,
            "strings": [
                {"gamma": [s.weight.real, s.weight.imag],
                 "create": list(s.creators), "annihilate": list(s.annihilators)}
                for s in self.strings
            ],
            **({"label": self.label} if self.label else {}),
        }


@dataclass(frozen=True)
class KrausChannel:
    """Convex mixture of error sequences; each branch is simulated as a pure run."""

    branches: tuple  # ((probability, (SystematicError, ...)), ...)

    def __post_init__(self):
        branches = tuple((float(p), tuple(errs)) for p, errs in self.branches)
        object.__setattr__(self, "branches", branches)
        total = sum(p for p, _ in branches)
        if not branches or abs(total - 1.0) > 1e-10 or any(p < 0 for p, _ in branches):
            raise InvalidArgumentError("Kraus branch probabilities must be >= 0 and sum to 1")


@dataclass(frozen=True, eq=False)
class ModeRestriction:
    """Heisenberg mode of site ``site`` split at the decoding boundary.

    The evolved operator is ``sum_m coefficients[m] a_m``; ``complement_part``
    covers sites ``1..N-D`` and ``decoding_part`` sites ``N-D+1..N``.
    """

    site: int
    time: float
    complement_part: np.ndarray
    decoding_part: np.ndarray

    @property
    def coefficients(self) -> np.ndarray:
        return np.concatenate([self.complement_part, self.decoding_part])


def affected_sites(errors) -> tuple[frozenset, int]:
    """Union of the sites touched by ``errors`` and its size ``n_bar``."""
    errors = list(errors)
    if not errors:
        raise InvalidArgumentError("need at least one error")
    sites = frozenset().union(*(e.sites for e in errors))
    return sites, len(sites)


def heisenberg_mode(spec: ChainSpec, site: int, action_time: float, D: int) -> ModeRestriction:
    """Mode ``a_site`` moved from ``action_time`` to the transfer time.

    ``U(s) a_k U(s)^dag = sum_m conj(M_km(s)) a_m`` with ``s = t_f - t``
    and ``M`` the (symmetric) mode propagator; ``conj(M(s)) = M(t - t_f)``.
    """
    N = spec.n_sites
    if not 1 <= site <= N:
        raise InvalidArgumentError(f"site {site} outside 1..{N}")
    if not 0 <= action_time <= spec.transfer_time:
        raise InvalidArgumentError("action time outside [0, t_f]")
    if not 2 <= D <= N:
        raise InvalidArgumentError(f"decoding region D={D} outside 2..{N}")
    row = np.conj(mode_propagator(spec, spec.transfer_time - action_time)[site - 1])
    return ModeRestriction(site, float(action_time), row[: N - D].copy(), row[N - D:].copy())


def apply_string(state: PureState, string: ErrorString) -> PureState:
    out = state
    for s in reversed(string.annihilators):
        out = apply_annihilate(out, s)
    for s in reversed(string.creators):
        out = apply_create(out, s)
    return PureState(out.n_sites, string.weight * out.amplitudes)


def apply_error(state: PureState, error: SystematicError) -> PureState:
    """Apply the error operator; the result may be unnormalised or zero.

    A zero result is legal (``state.is_annihilated``) and is only logged.
    """
    amps = np.zeros_like(state.amplitudes)
    for string in error.strings:
        amps = amps + apply_string(state, string).amplitudes
    out = PureState(state.n_sites, amps)
    if out.is_annihilated:
        log.info("error %r annihilated the state", error.label or error)
    else:
        log.debug("norm after error %s: %.12f", error.label, out.norm)
    return out


def make_phase_error(site: int, theta: float, t: float) -> SystematicError:
    """``exp(i theta n_site)`` written as ``1 + (e^{i theta} - 1) a^dag a``."""
    strings = [ErrorString(1.0)]
    g = np.exp(1j * theta) - 1.0
    if abs(g) > 0.0:
        strings.append(ErrorString(g, (site,), (site,)))
    return SystematicError(tuple(strings), t, label=f"phase({site},{theta:g})")


def make_pauli_z_error(site: int, t: float) -> SystematicError:
    """``Z = 1 - 2 a^dag a``."""
    return SystematicError(
        (ErrorString(1.0), ErrorString(-2.0, (site,), (site,))), t, label=f"Z{site}")


def make_hop_error(sites, theta: float, t: float) -> SystematicError:
    """``exp(i theta G)`` with ``G = a_i^dag a_j + a_j^dag a_i`` on a site pair.

    ``G^3 = G`` gives ``1 + i sin(theta) G + (cos(theta) - 1) G^2`` with
    ``G^2 = n_i + n_j - 2 n_i n_j``.
    """
    i, j = sites
    if i == j:
        raise InvalidArgumentError("hop error needs two distinct sites")
    s, c1 = np.sin(theta), np.cos(theta) - 1.0
    strings = [
        ErrorString(1.0),
        ErrorString(1j * s, (i,), (j,)),
        ErrorString(1j * s, (j,), (i,)),
        ErrorString(c1, (i,), (i,)),
        ErrorString(c1, (j,), (j,)),
        # n_i n_j = a_i^dag a_j^dag a_j a_i
        ErrorString(-2.0 * c1, (i, j), (j, i)),
    ]
    strings = [st for st in strings if st.weight != 0]
    return SystematicError(tuple(strings), t, label=f"hop({i},{j},{theta:g})")


def make_xx_error(site: int, t: float) -> SystematicError:
    """``X_i X_{i+1} = (a_i^dag - a_i)(a_{i+1}^dag + a_{i+1})`` in standard order."""
    i, j = site, site + 1
    return SystematicError(
        (
            ErrorString(1.0, (i, j), ()),
            ErrorString(1.0, (i,), (j,)),
            ErrorString(1.0, (j,), (i,)),
            ErrorString(-1.0, (), (i, j)),
        ),
        t,
        label=f"X{i}X{j}",
    )


def make_pauli_x_error(site: int, t: float):
    raise UnsupportedErrorError(
        f"single-site X_{site} needs O({site}) fermionic modes (Jordan-Wigner string); "
        "it is outside the low-rate description")


def error_from_dict(data: dict, spec: ChainSpec | None = None) -> SystematicError:
    """Build an error from the JSON schema (explicit strings or a named kind).

    ``time_fraction`` (multiples of ``t_f``) may replace ``time`` when ``spec``
    is given.
    """
    if "time" in data:
        t = float(data["time"])
    elif "time_fraction" in data and spec is not None:
        t = float(data["time_fraction"]) * spec.transfer_time
    else:
        raise InvalidArgumentError("error needs 'time' (or 'time_fraction' with a chain)")
    kind = data.get("kind")
    if kind is None:
        strings = tuple(
            ErrorString(complex(*s["gamma"]), s.get("create", ()), s.get("annihilate", ()))
            for s in data["strings"])
        err = SystematicError(strings, t, label=data.get("label", ""))
    elif kind == "pauli_z":
        err = make_pauli_z_error(int(data["site"]), t)
    elif kind == "phase":
        err = make_phase_error(int(data["site"]), float(data["theta"]), t)
    elif kind == "hop":
        err = make_hop_error(tuple(data["sites"]), float(data.get("theta", np.pi / 2)), t)
    elif kind == "xx":
        err = make_xx_error(int(data["site"]), t)
    elif kind == "pauli_x":
        err = make_pauli_x_error(int(data["site"]), t)
    else:
        raise InvalidArgumentError(f"unknown error kind {kind!r}")
    if spec is not None:
        err.validate(spec)
    return err


def errors_to_json(errors) -> str:
    return json.dumps([e.to_dict() for e in errors])


def order_by_time(errors) -> list:
    """Errors sorted by action time (stable for ties)."""
    return sorted(errors, key=lambda e: e.action_time)
