# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled bit-level kernels; see ``_kernels_py`` for the reference versions."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline int _parity(long long x) nogil:
    cdef int p = 0
    while x:
        x &= x - 1
        p ^= 1
    return p


def jw_apply(amps, int site, bint create):
    cdef const double complex[::1] s = np.ascontiguousarray(amps, dtype=np.complex128)
    cdef Py_ssize_t dim = s.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.zeros(dim, dtype=np.complex128)
    cdef long long bit = (<long long>1) << site
    cdef long long below = bit - 1
    cdef long long i
    cdef double complex[::1] o = out
    with nogil:
        for i in range(dim):
            if ((i & bit) == 0) == create:
                if _parity(i & below):
                    o[i ^ bit] = -s[i]
                else:
                    o[i ^ bit] = s[i]
    return out


def sector_states(int n_sites, int k):
    cdef long long total = (<long long>1) << n_sites
    cdef long long i, x
    cdef int c
    out = []
    for i in range(total):
        x = i
        c = 0
        while x:
            x &= x - 1
            c += 1
        if c == k:
            out.append(i)
    return np.asarray(out, dtype=np.int64)


def sector_hamiltonian(int n_sites, states, couplings, fields):
    cdef const cnp.int64_t[::1] st = np.ascontiguousarray(states, dtype=np.int64)
    cdef const double[::1] J = np.ascontiguousarray(couplings, dtype=np.float64)
    cdef const double[::1] B = np.ascontiguousarray(fields, dtype=np.float64)
    cdef Py_ssize_t dim = st.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] lookup = np.full((<long long>1) << n_sites, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] h = np.zeros((dim, dim), dtype=np.float64)
    cdef Py_ssize_t r
    cdef int n
    cdef long long s, b0, b1
    cdef double diag
    for r in range(dim):
        lookup[st[r]] = r
    for r in range(dim):
        s = st[r]
        diag = 0.0
        for n in range(n_sites):
            if (s >> n) & 1:
                diag += B[n]
            else:
                diag -= B[n]
        h[r, r] = diag
        for n in range(n_sites - 1):
            b0 = (s >> n) & 1
            b1 = (s >> (n + 1)) & 1
            if b0 != b1:
                h[r, lookup[s ^ ((<long long>3) << n)]] = J[n]
    return h
