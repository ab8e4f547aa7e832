"""Vectorised numpy versions of the bit-level kernels.

Same signatures as the compiled ``_kernels`` extension; used when it is not
built or when ``MIRRORCHAIN_PURE=1``.
"""
from __future__ import annotations

import numpy as np


def _popcount(x):
    x = np.asarray(x, dtype=np.int64)
    count = np.zeros_like(x)
    while np.any(x):
        count += x & 1
        x = x >> 1
    return count


def jw_apply(amps, site, create):
    """Apply ``a_site^dag`` (``create``) or ``a_site`` to a state vector.

    ``site`` is 0-based; bit ``site`` of the index is the occupation.
    """
    amps = np.asarray(amps, dtype=np.complex128)
    idx = np.arange(amps.shape[0], dtype=np.int64)
    bit = np.int64(1) << site
    src = idx[(idx & bit) == 0] if create else idx[(idx & bit) != 0]
    sign = 1.0 - 2.0 * (_popcount(src & (bit - 1)) & 1)
    out = np.zeros_like(amps)
    out[src ^ bit] = sign * amps[src]
    return out


def sector_states(n_sites, k):
    idx = np.arange(1 << n_sites, dtype=np.int64)
    return idx[_popcount(idx) == k]


def sector_hamiltonian(n_sites, states, couplings, fields):
    """Dense spin Hamiltonian restricted to the basis ``states``.

    Adjacent hops carry no Jordan-Wigner sign, so the hopping amplitude is
    exactly ``J_n``.
    """
    states = np.asarray(states, dtype=np.int64)
    couplings = np.asarray(couplings, dtype=np.float64)
    fields = np.asarray(fields, dtype=np.float64)
    dim = states.shape[0]
    lookup = np.full(1 << n_sites, -1, dtype=np.int64)
    lookup[states] = np.arange(dim)
    bits = (states[:, None] >> np.arange(n_sites)) & 1
    h = np.zeros((dim, dim))
    h[np.arange(dim), np.arange(dim)] = -((1 - 2 * bits) * fields).sum(axis=1)
    for n in range(n_sites - 1):
        movable = bits[:, n] != bits[:, n + 1]
        rows = np.nonzero(movable)[0]
        cols = lookup[states[rows] ^ (np.int64(3) << n)]
        h[rows, cols] = couplings[n]
    return h
