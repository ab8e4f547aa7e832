"""Shared checks for the encoding tests."""
import itertools

import numpy as np

from mirrorchain.decoder import error_branches
from mirrorchain.encoder import decoded_mode_dagger, region_mode
from mirrorchain.errmodel import heisenberg_mode


def error_modes(spec, errors, D):
    """Decoding-region ``F`` matrices for every (site, time) in ``errors``."""
    out = {}
    for _, seq in error_branches(errors):
        for err in seq:
            for site in err.sites:
                key = (site, err.action_time)
                if key not in out:
                    out[key] = region_mode(heisenberg_mode(spec, site, err.action_time, D).decoding_part)
    return list(out.values())


def sign_commutation_residual(pair, spec, errors, max_len=3):
    """Largest ``|P q^dag - (-1)^w q^dag P|`` over products of up to ``max_len`` modes."""
    fs = error_modes(spec, errors, pair.D)
    ops = fs + [f.conj().T for f in fs]
    worst = 0.0
    for q in pair.modes:
        qd = decoded_mode_dagger(q, pair.phase)
        for w in range(1, max_len + 1):
            for word in itertools.product(ops, repeat=w):
                P = np.linalg.multi_dot(word) if w > 1 else word[0]
                worst = max(worst, float(np.abs(P @ qd - (-1) ** w * qd @ P).max()))
    return worst


def anticommutator_residual(pair, spec, errors):
    """Largest ``|{q^dag, F}|`` and ``|{q^dag, F^dag}|`` over error modes."""
    worst = 0.0
    for q in pair.modes:
        qd = decoded_mode_dagger(q, pair.phase)
        for f in error_modes(spec, errors, pair.D):
            for g in (f, f.conj().T):
                worst = max(worst, float(np.abs(qd @ g + g @ qd).max()))
    return worst


def mode_algebra_residual(pair):
    """Residual of ``{q_a, q_b^dag} = delta`` and ``{q_a, q_b} = 0`` as matrices."""
    qd = [decoded_mode_dagger(q, pair.phase) for q in pair.modes]
    worst = 0.0
    dim = qd[0].shape[0]
    for a in range(2):
        for b in range(2):
            qa = qd[a].conj().T
            worst = max(worst, float(np.abs(qa @ qd[b] + qd[b] @ qa - (a == b) * np.eye(dim)).max()))
            worst = max(worst, float(np.abs(qd[a] @ qd[b] + qd[b] @ qd[a]).max()))
    return worst
