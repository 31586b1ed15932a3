"""Numpy fallback for the classical map kernels (same contract as ``_ckernels``)."""

import numpy as np

TWO_PI = 6.283185307179586


def _wrap(x, period):
    y = x - period * np.floor(x / period)
    y = np.where(y < 0, y + period, y)
    return np.where(y >= period, 0.0, y)


def free_flight(R, P, r, p, T_over_M, T_over_mu, w):
    L = 2.0 * w
    period = 4.0 * w
    R[:] = _wrap(R + P * T_over_M, TWO_PI)
    y = _wrap((r + w) + p * T_over_mu, period)
    back = y > L
    y = np.where(back, period - y, y)
    p[back] = -p[back]
    r[:] = y - w


def kick(R, P, r, p, K):
    hr = 0.5 * r
    cos_R = np.cos(R)
    P += K * np.sin(R) * np.cos(hr)
    p += (0.5 * K) * cos_R * np.sin(hr)


def coupled_steps(R, P, r, p, steps, T_over_M, T_over_mu, w, K):
    for _ in range(steps):
        free_flight(R, P, r, p, T_over_M, T_over_mu, w)
        kick(R, P, r, p, K)


def standard_map_steps(R, P, steps, T_over_M, K):
    for _ in range(steps):
        R[:] = _wrap(R + P * T_over_M, TWO_PI)
        P += K * np.sin(R)
