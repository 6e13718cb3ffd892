# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for operator application and pair correlators.

Every routine here has a numpy twin in ``_fallback.py`` with the same
signature; ``kernels.py`` picks one at import time.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport free, malloc

cnp.import_array()


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef struct Term:
    uint64_t mask      # both sites
    uint64_t req       # required occupation of those sites before acting
    uint64_t below1    # sites below site1 (ordering sign of O1)
    uint64_t below2    # sites below site2 (ordering sign of O2)
    uint64_t bit2      # site2 alone
    int fermionic
    int pweight
    double coef


cdef Term* _compile_terms(const int64_t[:] site1, const int64_t[:] set1,
                          const int64_t[:] site2, const int64_t[:] set2,
                          const int64_t[:] fermionic, const int64_t[:] pweight,
                          const double[:] coef) except NULL:
    cdef Py_ssize_t nt = coef.shape[0], t
    cdef Term* terms = <Term*>malloc((nt + 1) * sizeof(Term))
    if terms == NULL:
        raise MemoryError()
    cdef uint64_t m1, m2
    for t in range(nt):
        if site1[t] == site2[t]:
            free(terms)
            raise ValueError("terms must act on two distinct sites")
        m1 = <uint64_t>1 << site1[t]
        m2 = <uint64_t>1 << site2[t]
        terms[t].mask = m1 | m2
        # O1 fills its site iff it was empty; same for O2
        terms[t].req = (0 if set1[t] else m1) | (0 if set2[t] else m2)
        terms[t].below1 = m1 - 1
        terms[t].below2 = m2 - 1
        terms[t].bit2 = m2
        terms[t].fermionic = <int>fermionic[t]
        terms[t].pweight = <int>pweight[t]
        terms[t].coef = coef[t]
    return terms


cdef inline double _sign(uint64_t b, Term* t) noexcept nogil:
    cdef uint64_t odd = 0
    cdef uint64_t b1
    if t.fermionic:
        b1 = b ^ t.bit2
        odd = (__builtin_popcountll(b & t.below2) + __builtin_popcountll(b1 & t.below1)) & 1
    if t.pweight:
        odd ^= __builtin_popcountll(b ^ t.mask) & 1
    # arithmetic, not a branch: the sign is effectively random per state
    return 1.0 - 2.0 * <double>odd


cdef struct Group:
    int lo
    int hi
    int slot[4]        # term index for occupation pattern n_lo + 2 n_hi, or -1


cdef Group* _group_terms(Term* terms, const int64_t[:] site1, const int64_t[:] site2,
                         Py_ssize_t nt, Py_ssize_t* ngroups) except NULL:
    """Bucket terms by site pair so each state needs one table lookup per pair."""
    cdef Group* groups = <Group*>malloc((nt + 1) * sizeof(Group))
    if groups == NULL:
        raise MemoryError()
    cdef Py_ssize_t t, g, ng = 0
    cdef int lo, hi, pat
    for t in range(nt):
        lo = <int>min(site1[t], site2[t])
        hi = <int>max(site1[t], site2[t])
        pat = <int>(((terms[t].req >> lo) & 1) | (((terms[t].req >> hi) & 1) << 1))
        for g in range(ng):
            if groups[g].lo == lo and groups[g].hi == hi and groups[g].slot[pat] < 0:
                break
        else:
            g = ng
            ng += 1
            groups[g].lo = lo
            groups[g].hi = hi
            groups[g].slot[0] = groups[g].slot[1] = groups[g].slot[2] = groups[g].slot[3] = -1
        groups[g].slot[pat] = <int>t
    ngroups[0] = ng
    return groups


def apply_terms(const int64_t[:] states, const int64_t[:] lookup,
                const int64_t[:] site1, const int64_t[:] set1,
                const int64_t[:] site2, const int64_t[:] set2,
                const int64_t[:] fermionic, const int64_t[:] pweight,
                const double[:] coef, const double[:] diag,
                const double[:] v, double[:] out):
    """Accumulate ``out += H v`` for a two-operator term table plus a diagonal.

    Returns the number of term actions that left the basis (0 when the
    operator respects the basis' parity sector).
    """
    cdef Py_ssize_t n = states.shape[0]
    cdef Py_ssize_t nt = coef.shape[0]
    cdef Term* terms = _compile_terms(site1, set1, site2, set2, fermionic, pweight, coef)
    cdef Py_ssize_t ng = 0
    cdef Group* groups = NULL
    cdef Py_ssize_t s, g
    cdef int t, pat
    cdef int64_t r
    cdef uint64_t b
    cdef double vs
    cdef Py_ssize_t escaped = 0
    try:
        groups = _group_terms(terms, site1, site2, nt, &ng)
        with nogil:
            for s in range(n):
                vs = v[s]
                out[s] += diag[s] * vs
                if vs == 0.0:
                    continue
                b = <uint64_t>states[s]
                for g in range(ng):
                    pat = <int>(((b >> groups[g].lo) & 1) | (((b >> groups[g].hi) & 1) << 1))
                    t = groups[g].slot[pat]
                    if t < 0:
                        continue
                    r = lookup[b ^ terms[t].mask]
                    if r < 0:
                        escaped += 1
                        continue
                    out[r] += _sign(b, &terms[t]) * terms[t].coef * vs
    finally:
        free(terms)
        free(groups)
    return escaped


def term_action(const int64_t[:] states, const int64_t[:] lookup,
                const int64_t[:] site1, const int64_t[:] set1,
                const int64_t[:] site2, const int64_t[:] set2,
                const int64_t[:] fermionic, const int64_t[:] pweight,
                const double[:] coef):
    """COO triplets ``(row, col, value)`` of the off-diagonal term table.

    Rows are basis indices of the image state; ``-1`` marks an image that
    left the basis.
    """
    cdef Py_ssize_t n = states.shape[0]
    cdef Py_ssize_t nt = coef.shape[0]
    cdef Term* terms = _compile_terms(site1, set1, site2, set2, fermionic, pweight, coef)
    rows_arr = np.empty(n * nt, dtype=np.int64)
    cols_arr = np.empty(n * nt, dtype=np.int64)
    vals_arr = np.empty(n * nt, dtype=np.float64)
    cdef int64_t[:] rows = rows_arr
    cdef int64_t[:] cols = cols_arr
    cdef double[:] vals = vals_arr
    cdef Py_ssize_t s, t, k = 0
    cdef uint64_t b
    try:
        with nogil:
            for s in range(n):
                b = <uint64_t>states[s]
                for t in range(nt):
                    if (b & terms[t].mask) != terms[t].req:
                        continue
                    rows[k] = lookup[b ^ terms[t].mask]
                    cols[k] = s
                    vals[k] = _sign(b, &terms[t]) * terms[t].coef
                    k += 1
    finally:
        free(terms)
    return rows_arr[:k], cols_arr[:k], vals_arr[:k]


def pair_correlators(const double complex[:] psi, int n_sites):
    """All-pairs X-state correlators of a full-basis amplitude vector.

    Returns ``occ[i] = <n_i>``, ``nn[i, j] = <n_i n_j>``, and the qubit-trace
    coherences ``hop[i, j] = sum psi(..0_i..1_j..) conj psi(..1_i..0_j..)`` and
    ``pair[i, j] = sum psi(..0_i..0_j..) conj psi(..1_i..1_j..)`` for i < j.
    """
    cdef Py_ssize_t dim = psi.shape[0]
    occ_arr = np.zeros(n_sites, dtype=np.float64)
    nn_arr = np.zeros((n_sites, n_sites), dtype=np.float64)
    hop_arr = np.zeros((n_sites, n_sites), dtype=np.complex128)
    pair_arr = np.zeros((n_sites, n_sites), dtype=np.complex128)
    cdef double[:] occ = occ_arr
    cdef double[:, :] nn = nn_arr
    cdef double complex[:, :] hop = hop_arr
    cdef double complex[:, :] pair = pair_arr
    cdef Py_ssize_t b
    cdef int i, j, bi, bj
    cdef uint64_t mi, mj
    cdef double complex p
    cdef double w
    with nogil:
        for b in range(dim):
            p = psi[b]
            if p.real == 0.0 and p.imag == 0.0:
                continue
            w = p.real * p.real + p.imag * p.imag
            for i in range(n_sites):
                mi = <uint64_t>1 << i
                bi = (b & mi) != 0
                if bi:
                    occ[i] += w
                for j in range(i + 1, n_sites):
                    mj = <uint64_t>1 << j
                    bj = (b & mj) != 0
                    if bi and bj:
                        nn[i, j] += w
                    elif not bi and bj:
                        hop[i, j] += p * psi[<Py_ssize_t>(<uint64_t>b ^ mi ^ mj)].conjugate()
                    elif not bi and not bj:
                        pair[i, j] += p * psi[<Py_ssize_t>(<uint64_t>b | mi | mj)].conjugate()
    return occ_arr, nn_arr, hop_arr, pair_arr
