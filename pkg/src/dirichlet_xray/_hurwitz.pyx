# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Euler-Maclaurin kernel for the Hurwitz zeta function."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, cos, sin, sqrt

cnp.import_array()


cdef inline void _neumaier(double *s, double *c, double x) noexcept nogil:
    cdef double t = s[0] + x
    if abs(s[0]) >= abs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


def hurwitz_em(s, double a, n_terms, bern):
    """Euler-Maclaurin sums of zeta(s, a) at many points.

    ``bern[j-1]`` holds B_{2j}/(2j)! for j = 1..M+1; the first M corrections
    are applied and the (M+1)-th is returned as the error estimate.
    """
    cdef const double complex[::1] sv = np.ascontiguousarray(s, dtype=np.complex128)
    cdef const long long[::1] nv = np.ascontiguousarray(n_terms, dtype=np.int64)
    cdef const double[::1] bv = np.ascontiguousarray(bern, dtype=np.float64)
    cdef Py_ssize_t npts = sv.shape[0]
    out_arr = np.empty(npts, dtype=np.complex128)
    err_arr = np.empty(npts, dtype=np.float64)
    cdef double complex[::1] out = out_arr
    cdef double[::1] err = err_arr
    cdef Py_ssize_t i, k, j, n, m = bv.shape[0] - 1
    cdef double sr, si, lk, mag, ph, re_s, re_c, im_s, im_c, x, lx
    cdef double complex sc, base, total, poch, term, corr
    with nogil:
        for i in range(npts):
            sc = sv[i]
            sr = sc.real
            si = sc.imag
            n = nv[i]
            re_s = 0.0
            re_c = 0.0
            im_s = 0.0
            im_c = 0.0
            for k in range(n):
                lk = log(k + a)
                mag = exp(-sr * lk)
                ph = si * lk
                _neumaier(&re_s, &re_c, mag * cos(ph))
                _neumaier(&im_s, &im_c, -mag * sin(ph))
            x = n + a
            lx = log(x)
            mag = exp(-sr * lx)
            ph = si * lx
            base = mag * cos(ph) - 1j * mag * sin(ph)
            total = (re_s + re_c) + 1j * (im_s + im_c)
            total = total + x * base / (sc - 1.0) + 0.5 * base
            poch = sc
            term = base / x
            err[i] = 0.0
            for j in range(1, m + 2):
                corr = bv[j - 1] * poch * term
                if j <= m:
                    total = total + corr
                else:
                    err[i] = sqrt(corr.real * corr.real + corr.imag * corr.imag)
                poch = poch * (sc + 2 * j - 1) * (sc + 2 * j)
                term = term / (x * x)
            out[i] = total
    return out_arr, err_arr


def hurwitz_em_d(s, double a, n_terms, bern):
    """Like ``hurwitz_em`` but also returns d/ds zeta(s, a)."""
    cdef const double complex[::1] sv = np.ascontiguousarray(s, dtype=np.complex128)
    cdef const long long[::1] nv = np.ascontiguousarray(n_terms, dtype=np.int64)
    cdef const double[::1] bv = np.ascontiguousarray(bern, dtype=np.float64)
    cdef Py_ssize_t npts = sv.shape[0]
    out_arr = np.empty(npts, dtype=np.complex128)
    dout_arr = np.empty(npts, dtype=np.complex128)
    err_arr = np.empty(npts, dtype=np.float64)
    cdef double complex[::1] out = out_arr
    cdef double complex[::1] dout = dout_arr
    cdef double[::1] err = err_arr
    cdef Py_ssize_t i, k, j, n, m = bv.shape[0] - 1
    cdef double sr, si, lk, mag, ph, c, sn, x, lx
    cdef double re_s, re_c, im_s, im_c, dre_s, dre_c, dim_s, dim_c
    cdef double complex sc, base, total, dtotal, poch, dpoch, term, corr, t0
    with nogil:
        for i in range(npts):
            sc = sv[i]
            sr = sc.real
            si = sc.imag
            n = nv[i]
            re_s = 0.0
            re_c = 0.0
            im_s = 0.0
            im_c = 0.0
            dre_s = 0.0
            dre_c = 0.0
            dim_s = 0.0
            dim_c = 0.0
            for k in range(n):
                lk = log(k + a)
                mag = exp(-sr * lk)
                ph = si * lk
                c = mag * cos(ph)
                sn = -mag * sin(ph)
                _neumaier(&re_s, &re_c, c)
                _neumaier(&im_s, &im_c, sn)
                _neumaier(&dre_s, &dre_c, -lk * c)
                _neumaier(&dim_s, &dim_c, -lk * sn)
            x = n + a
            lx = log(x)
            mag = exp(-sr * lx)
            ph = si * lx
            base = mag * cos(ph) - 1j * mag * sin(ph)
            total = (re_s + re_c) + 1j * (im_s + im_c)
            dtotal = (dre_s + dre_c) + 1j * (dim_s + dim_c)
            t0 = x * base / (sc - 1.0)
            total = total + t0 + 0.5 * base
            dtotal = dtotal - lx * t0 - t0 / (sc - 1.0) - 0.5 * lx * base
            poch = sc
            dpoch = 1.0
            term = base / x
            err[i] = 0.0
            for j in range(1, m + 2):
                corr = bv[j - 1] * poch * term
                if j <= m:
                    total = total + corr
                    dtotal = dtotal + bv[j - 1] * (dpoch - lx * poch) * term
                else:
                    err[i] = sqrt(corr.real * corr.real + corr.imag * corr.imag)
                dpoch = dpoch * (sc + 2 * j - 1) * (sc + 2 * j) + poch * (2.0 * sc + 4 * j - 1)
                poch = poch * (sc + 2 * j - 1) * (sc + 2 * j)
                term = term / (x * x)
            out[i] = total
            dout[i] = dtotal
    return out_arr, dout_arr, err_arr
