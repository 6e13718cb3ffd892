"""Pure numpy implementations of the kernels in ``_core.pyx``.

Loops run over terms (or site pairs) and are vectorized over basis states,
so the cost per call is O(n_terms) numpy passes instead of a C double loop.
"""

import numpy as np


def _popcount(x):
    return np.bitwise_count(x.astype(np.uint64)).astype(np.int64)


def _act(b, site, create, fermionic):
    m = np.int64(1) << site
    occ = (b & m) != 0
    alive = occ != bool(create)
    sign = np.ones(b.shape, dtype=np.int64)
    if fermionic:
        below = _popcount(b & (m - 1)) & 1
        sign = 1 - 2 * below
    return alive, b ^ m, sign


def _term_images(states, t):
    site1, set1, site2, set2, fermionic, pweight = t
    alive, b1, s1 = _act(states, site2, set2, fermionic)
    alive2, b2, s2 = _act(b1, site1, set1, fermionic)
    alive &= alive2
    sign = s1 * s2
    if pweight:
        sign = sign * (1 - 2 * (_popcount(b2) & 1))
    return alive, b2, sign


def _rows(site1, set1, site2, set2, fermionic, pweight):
    return zip(site1.tolist(), set1.tolist(), site2.tolist(), set2.tolist(),
               fermionic.tolist(), pweight.tolist())


def apply_terms(states, lookup, site1, set1, site2, set2, fermionic, pweight,
                coef, diag, v, out):
    states = np.asarray(states)
    lookup = np.asarray(lookup)
    v = np.asarray(v)
    out += np.asarray(diag) * v
    escaped = 0
    for t, c in zip(_rows(site1, set1, site2, set2, fermionic, pweight), coef.tolist()):
        alive, b2, sign = _term_images(states, t)
        src = np.nonzero(alive)[0]
        dst = lookup[b2[src]]
        ok = dst >= 0
        escaped += int(np.count_nonzero(~ok))
        # a fixed term maps distinct states to distinct images, so no repeats
        out[dst[ok]] += c * sign[src[ok]] * v[src[ok]]
    return escaped


def term_action(states, lookup, site1, set1, site2, set2, fermionic, pweight, coef):
    states = np.asarray(states)
    lookup = np.asarray(lookup)
    rows, cols, vals = [], [], []
    for t, c in zip(_rows(site1, set1, site2, set2, fermionic, pweight), coef.tolist()):
        alive, b2, sign = _term_images(states, t)
        src = np.nonzero(alive)[0]
        rows.append(lookup[b2[src]])
        cols.append(src)
        vals.append(c * sign[src].astype(np.float64))
    if not rows:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy(), np.empty(0)
    return (np.concatenate(rows).astype(np.int64), np.concatenate(cols).astype(np.int64),
            np.concatenate(vals))


def pair_correlators(psi, n_sites):
    psi = np.asarray(psi, dtype=np.complex128)
    labels = np.arange(psi.shape[0], dtype=np.int64)
    prob = np.abs(psi) ** 2
    bits = [((labels >> i) & 1).astype(bool) for i in range(n_sites)]
    occ = np.array([prob[bits[i]].sum() for i in range(n_sites)])
    nn = np.zeros((n_sites, n_sites))
    hop = np.zeros((n_sites, n_sites), dtype=np.complex128)
    pair = np.zeros((n_sites, n_sites), dtype=np.complex128)
    for i in range(n_sites):
        mi = 1 << i
        for j in range(i + 1, n_sites):
            mj = 1 << j
            nn[i, j] = prob[bits[i] & bits[j]].sum()
            src = labels[~bits[i] & bits[j]]
            hop[i, j] = np.dot(psi[src], psi[src ^ mi ^ mj].conj())
            src = labels[~bits[i] & ~bits[j]]
            pair[i, j] = np.dot(psi[src], psi[src | mi | mj].conj())
    return occ, nn, hop, pair
