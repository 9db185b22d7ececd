# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.  Semantics mirror ``nlsscat._pykernels`` exactly."""
import numpy as np

from libc.math cimport cos, sin, exp, sqrt, pow, floor, ceil

cdef double INV_SQRT_2PI = 0.3989422804014327


def nonlinear_phase(double complex[::1] u, double dt, double lam,
                    double mu, double dexp):
    """In place: u <- u * exp(-i dt (lam |u|^2 + mu |u|^(2 + 2 dexp)))."""
    cdef Py_ssize_t k, n = u.shape[0]
    cdef double re, im, r, th, c, s
    cdef bint pert = mu != 0.0
    for k in range(n):
        re = u[k].real
        im = u[k].imag
        r = re * re + im * im
        th = lam * r
        if pert:
            th = th + mu * pow(r, 1.0 + dexp)
        th = -dt * th
        c = cos(th)
        s = sin(th)
        u[k] = (re * c - im * s) + 1j * (re * s + im * c)


def gaussian_moments(const double complex[::1] a, double x0, double dx,
                     double t, const double[::1] v, double reach):
    """For each v: sums of a_k chi(y_k) and a_k y_k chi(y_k), y = (x - v t)/sqrt(t).

    Only samples with |y| <= reach contribute.
    """
    cdef Py_ssize_t n = a.shape[0], nv = v.shape[0]
    cdef Py_ssize_t j, k, lo, hi
    cdef double st = sqrt(t), centre, y, w, xk
    cdef double complex s0, s1
    m0 = np.zeros(nv, dtype=np.complex128)
    m1 = np.zeros(nv, dtype=np.complex128)
    cdef double complex[::1] m0v = m0
    cdef double complex[::1] m1v = m1
    with nogil:
        for j in range(nv):
            centre = v[j] * t
            lo = <Py_ssize_t> ceil((centre - reach * st - x0) / dx)
            hi = <Py_ssize_t> floor((centre + reach * st - x0) / dx)
            if lo < 0:
                lo = 0
            if hi > n - 1:
                hi = n - 1
            s0 = 0.0
            s1 = 0.0
            for k in range(lo, hi + 1):
                xk = x0 + k * dx
                y = (xk - centre) / st
                w = INV_SQRT_2PI * exp(-0.5 * y * y)
                s0 = s0 + a[k] * w
                s1 = s1 + a[k] * (w * y)
            m0v[j] = s0
            m1v[j] = s1
    return m0, m1


def fourier_series(const double complex[::1] coef, double k0, double dk,
                   const double[::1] p, double sign):
    """For each point p: sum_j coef_j exp(sign * i (k0 + j dk) p)."""
    cdef Py_ssize_t n = coef.shape[0], npts = p.shape[0]
    cdef Py_ssize_t i, j
    cdef double ph
    cdef double complex acc, z, step
    out = np.zeros(npts, dtype=np.complex128)
    cdef double complex[::1] ov = out
    with nogil:
        for i in range(npts):
            ph = sign * k0 * p[i]
            z = cos(ph) + 1j * sin(ph)
            ph = sign * dk * p[i]
            step = cos(ph) + 1j * sin(ph)
            acc = 0.0
            for j in range(n):
                acc = acc + coef[j] * z
                z = z * step
                if (j & 63) == 63:
                    # re-anchor the recurrence to bound rounding drift
                    ph = sign * (k0 + (j + 1) * dk) * p[i]
                    z = cos(ph) + 1j * sin(ph)
            ov[i] = acc
    return out
