"""Compiled bit-mask stride kernels for real-amplitude CX circuits."""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def ry_inplace(psi, q, c, s):
    stride = 1 << q
    for base in range(0, psi.size, 2 * stride):
        for k in range(base, base + stride):
            a = psi[k]
            b = psi[k + stride]
            psi[k] = c * a - s * b
            psi[k + stride] = s * a + c * b


@njit(cache=True)
def _ry_overlap(lam, psi, q):
    # <lam| (-iY/2) |psi> for real vectors, times 2
    stride = 1 << q
    acc = 0.0
    for base in range(0, psi.size, 2 * stride):
        for k in range(base, base + stride):
            acc += lam[k + stride] * psi[k] - lam[k] * psi[k + stride]
    return acc


@njit(cache=True)
def cx_forward(theta, n, L, fwd):
    psi = np.zeros(1 << n)
    psi[0] = 1.0
    for q in range(n):
        ry_inplace(psi, q, np.cos(theta[0, q] / 2), np.sin(theta[0, q] / 2))
    for layer in range(1, L + 1):
        psi = psi[fwd]
        for q in range(n):
            ry_inplace(psi, q, np.cos(theta[layer, q] / 2), np.sin(theta[layer, q] / 2))
    return psi


@njit(cache=True)
def cx_value_grad(theta, n, L, table, fwd, inv):
    psi = cx_forward(theta, n, L, fwd)
    lam = table * psi
    value = np.dot(psi, lam)
    grad = np.zeros((L + 1, n))
    for layer in range(L, -1, -1):
        for q in range(n - 1, -1, -1):
            grad[layer, q] = _ry_overlap(lam, psi, q)
            c, s = np.cos(theta[layer, q] / 2), np.sin(theta[layer, q] / 2)
            ry_inplace(psi, q, c, -s)
            ry_inplace(lam, q, c, -s)
        if layer:
            psi = psi[inv]
            lam = lam[inv]
    return value, grad
