# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Fused fixed-step RK4 for dy/dt = L y.

L is passed split as ``diag + R + 1j * I`` where ``diag`` is complex and R, I
are real CSR matrices holding the off-diagonal real / imaginary parts.  Lindblad
generators of Jaynes-Cummings models have purely real (jump) or purely imaginary
(Hamiltonian) off-diagonal entries, so each nonzero costs two real multiplies.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int32_t idx_t


cdef void _apply(const double[::1] dre, const double[::1] dim_,
                 const idx_t[::1] rp, const idx_t[::1] ri, const double[::1] rv,
                 const idx_t[::1] ip, const idx_t[::1] ii, const double[::1] iv,
                 const double[::1] xr, const double[::1] xi,
                 double[::1] outr, double[::1] outi) noexcept nogil:
    cdef Py_ssize_t n = dre.shape[0]
    cdef Py_ssize_t r, k, c
    cdef double sr, si, v
    for r in range(n):
        sr = dre[r] * xr[r] - dim_[r] * xi[r]
        si = dre[r] * xi[r] + dim_[r] * xr[r]
        for k in range(rp[r], rp[r + 1]):
            c = ri[k]
            v = rv[k]
            sr += v * xr[c]
            si += v * xi[c]
        for k in range(ip[r], ip[r + 1]):
            c = ii[k]
            v = iv[k]
            sr -= v * xi[c]
            si += v * xr[c]
        outr[r] = sr
        outi[r] = si


def rk4_split(const double complex[::1] diag,
              const idx_t[::1] rp, const idx_t[::1] ri, const double[::1] rv,
              const idx_t[::1] ip, const idx_t[::1] ii, const double[::1] iv,
              double complex[::1] y, double h, Py_ssize_t nsteps):
    """Advance ``y`` in place by ``nsteps`` RK4 steps of size ``h``."""
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t step, i
    cdef double h2 = 0.5 * h, h3 = h / 3.0, h6 = h / 6.0
    work = np.empty((8, n), dtype=np.float64)
    cdef double[::1] dre = np.ascontiguousarray(np.real(diag))
    cdef double[::1] dimg = np.ascontiguousarray(np.imag(diag))
    cdef double[::1] yr = work[0], yi = work[1], tr = work[2], ti = work[3]
    cdef double[::1] kr = work[4], ki = work[5], ar = work[6], ai = work[7]
    for i in range(n):
        yr[i] = y[i].real
        yi[i] = y[i].imag
    with nogil:
        for step in range(nsteps):
            _apply(dre, dimg, rp, ri, rv, ip, ii, iv, yr, yi, kr, ki)
            for i in range(n):
                ar[i] = yr[i] + h6 * kr[i]
                ai[i] = yi[i] + h6 * ki[i]
                tr[i] = yr[i] + h2 * kr[i]
                ti[i] = yi[i] + h2 * ki[i]
            _apply(dre, dimg, rp, ri, rv, ip, ii, iv, tr, ti, kr, ki)
            for i in range(n):
                ar[i] += h3 * kr[i]
                ai[i] += h3 * ki[i]
                tr[i] = yr[i] + h2 * kr[i]
                ti[i] = yi[i] + h2 * ki[i]
            _apply(dre, dimg, rp, ri, rv, ip, ii, iv, tr, ti, kr, ki)
            for i in range(n):
                ar[i] += h3 * kr[i]
                ai[i] += h3 * ki[i]
                tr[i] = yr[i] + h * kr[i]
                ti[i] = yi[i] + h * ki[i]
            _apply(dre, dimg, rp, ri, rv, ip, ii, iv, tr, ti, kr, ki)
            for i in range(n):
                yr[i] = ar[i] + h6 * kr[i]
                yi[i] = ai[i] + h6 * ki[i]
    for i in range(n):
        y[i] = yr[i] + 1j * yi[i]
