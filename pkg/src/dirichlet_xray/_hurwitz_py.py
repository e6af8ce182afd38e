"""Pure numpy Euler-Maclaurin kernel for the Hurwitz zeta function.

Used when the compiled ``_hurwitz`` extension is unavailable. Semantics match
the extension point for point: each entry of ``s`` uses its own cutoff.
"""

import numpy as np

_CHUNK = 1 << 18  # matrix entries per block


def hurwitz_em(s, a, n_terms, bern):
    """Euler-Maclaurin sums of zeta(s, a) at many points.

    ``bern[j-1]`` holds B_{2j}/(2j)! for j = 1..M+1; the first M corrections
    are applied and the (M+1)-th is returned as the error estimate.
    """
    s = np.ascontiguousarray(s, dtype=np.complex128)
    n_terms = np.ascontiguousarray(n_terms, dtype=np.int64)
    out = np.empty(s.shape, dtype=np.complex128)
    err = np.empty(s.shape, dtype=np.float64)
    if s.size == 0:
        return out, err
    nmax = int(n_terms.max())
    rows = max(1, _CHUNK // max(nmax, 1))
    logk = np.log(np.arange(nmax) + a)
    for lo in range(0, s.size, rows):
        ss = s[lo : lo + rows]
        nn = n_terms[lo : lo + rows]
        width = int(nn.max())
        terms = np.exp(-ss[:, None] * logk[None, :width])
        terms[np.arange(width)[None, :] >= nn[:, None]] = 0.0
        head = terms.sum(axis=1)
        out[lo : lo + rows], err[lo : lo + rows] = _tail(ss, a, nn, bern, head)
    return out, err


def hurwitz_em_d(s, a, n_terms, bern):
    """Like ``hurwitz_em`` but also returns d/ds zeta(s, a)."""
    s = np.ascontiguousarray(s, dtype=np.complex128)
    n_terms = np.ascontiguousarray(n_terms, dtype=np.int64)
    out = np.empty(s.shape, dtype=np.complex128)
    dout = np.empty(s.shape, dtype=np.complex128)
    err = np.empty(s.shape, dtype=np.float64)
    if s.size == 0:
        return out, dout, err
    nmax = int(n_terms.max())
    rows = max(1, _CHUNK // max(nmax, 1))
    logk = np.log(np.arange(nmax) + a)
    for lo in range(0, s.size, rows):
        ss = s[lo : lo + rows]
        nn = n_terms[lo : lo + rows]
        width = int(nn.max())
        terms = np.exp(-ss[:, None] * logk[None, :width])
        terms[np.arange(width)[None, :] >= nn[:, None]] = 0.0
        head = terms.sum(axis=1)
        dhead = -(terms @ logk[:width])
        sl = slice(lo, lo + rows)
        out[sl], dout[sl], err[sl] = _tail_d(ss, a, nn, bern, head, dhead)
    return out, dout, err


def _tail_d(s, a, n, bern, head, dhead):
    x = n + a
    logx = np.log(x)
    base = np.exp(-s * logx)
    t0 = x * base / (s - 1.0)
    total = head + t0 + 0.5 * base
    dtotal = dhead - logx * t0 - t0 / (s - 1.0) - 0.5 * logx * base
    poch = s.copy()
    dpoch = np.ones_like(s)
    term = base / x
    m = len(bern) - 1
    last = np.zeros(s.shape)
    for j in range(1, m + 2):
        corr = bern[j - 1] * poch * term
        if j <= m:
            total = total + corr
            dtotal = dtotal + bern[j - 1] * (dpoch - logx * poch) * term
        else:
            last = np.abs(corr)
        dpoch = dpoch * (s + 2 * j - 1) * (s + 2 * j) + poch * (2.0 * s + 4 * j - 1)
        poch = poch * (s + 2 * j - 1) * (s + 2 * j)
        term = term / (x * x)
    return total, dtotal, last


def _tail(s, a, n, bern, head):
    x = n + a
    logx = np.log(x)
    base = np.exp(-s * logx)  # x^-s
    total = head + x * base / (s - 1.0) + 0.5 * base
    poch = s.copy()
    term = base / x
    m = len(bern) - 1
    last = np.zeros(s.shape)
    for j in range(1, m + 2):
        corr = bern[j - 1] * poch * term
        if j <= m:
            total = total + corr
        else:
            last = np.abs(corr)
        poch = poch * (s + 2 * j - 1) * (s + 2 * j)
        term = term / (x * x)
    return total, last
