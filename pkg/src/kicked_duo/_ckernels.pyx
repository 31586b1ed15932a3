# cython: language_level=3
"""Compiled per-particle kernels for the classical maps.

All routines update the phase-space arrays in place.  They mirror
``_pykernels`` operation for operation.
"""

from libc.math cimport cos, floor, sin

cdef double TWO_PI = 6.283185307179586


cdef inline double _wrap(double x, double period) nogil:
    cdef double y = x - period * floor(x / period)
    if y < 0:
        y += period
    if y >= period:
        y = 0.0
    return y


def free_flight(double[::1] R, double[::1] P, double[::1] r, double[::1] p,
                double T_over_M, double T_over_mu, double w):
    cdef Py_ssize_t i, n = R.shape[0]
    cdef double L = 2.0 * w, period = 4.0 * w, y
    with nogil:
        for i in range(n):
            R[i] = _wrap(R[i] + P[i] * T_over_M, TWO_PI)
            y = _wrap((r[i] + w) + p[i] * T_over_mu, period)
            if y > L:
                y = period - y
                p[i] = -p[i]
            r[i] = y - w


def kick(double[::1] R, double[::1] P, double[::1] r, double[::1] p, double K):
    cdef Py_ssize_t i, n = R.shape[0]
    cdef double half = 0.5 * K, hr
    with nogil:
        for i in range(n):
            hr = 0.5 * r[i]
            P[i] = P[i] + K * sin(R[i]) * cos(hr)
            p[i] = p[i] + half * cos(R[i]) * sin(hr)


def coupled_steps(double[::1] R, double[::1] P, double[::1] r, double[::1] p, long steps,
                  double T_over_M, double T_over_mu, double w, double K):
    cdef Py_ssize_t i, n = R.shape[0]
    cdef long s
    cdef double L = 2.0 * w, period = 4.0 * w, half = 0.5 * K, y, hr
    cdef double Ri, Pi, ri, pi
    with nogil:
        for i in range(n):
            Ri = R[i]
            Pi = P[i]
            ri = r[i]
            pi = p[i]
            for s in range(steps):
                Ri = _wrap(Ri + Pi * T_over_M, TWO_PI)
                y = _wrap((ri + w) + pi * T_over_mu, period)
                if y > L:
                    y = period - y
                    pi = -pi
                ri = y - w
                hr = 0.5 * ri
                Pi = Pi + K * sin(Ri) * cos(hr)
                pi = pi + half * cos(Ri) * sin(hr)
            R[i] = Ri
            P[i] = Pi
            r[i] = ri
            p[i] = pi


def standard_map_steps(double[::1] R, double[::1] P, long steps, double T_over_M, double K):
    cdef Py_ssize_t i, n = R.shape[0]
    cdef long s
    cdef double Ri, Pi
    with nogil:
        for i in range(n):
            Ri = R[i]
            Pi = P[i]
            for s in range(steps):
                Ri = _wrap(Ri + Pi * T_over_M, TWO_PI)
                Pi = Pi + K * sin(Ri)
            R[i] = Ri
            P[i] = Pi
