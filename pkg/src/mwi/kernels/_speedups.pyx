# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled training kernels: full-batch Adam on sigmoid/softmax heads.

Mirrors ``_python.py`` loop-for-loop; the whole epoch loop runs without
touching the interpreter, which matters because few-shot problems are tiny
and per-epoch numpy dispatch overhead dominates the pure-Python backend.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, sqrt

cnp.import_array()

cdef double CLIP_LO = 1e-12
cdef double CLIP_HI = 1.0 - 1e-12


cdef inline double _clip(double s) nogil:
    if s < CLIP_LO:
        return CLIP_LO
    if s > CLIP_HI:
        return CLIP_HI
    return s


def train_sigmoid(double[:, ::1] weights, double[:, ::1] x, double[:, ::1] y,
                  int epochs, double lr, double beta1, double beta2,
                  double eps, bint renorm):
    """Full-batch BCE + Adam on a sigmoid head. Mutates ``weights`` in place."""
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1], k = y.shape[1]
    cdef cnp.ndarray losses_arr = np.empty(epochs, dtype=np.float64)
    cdef double[::1] losses = losses_arr
    cdef double[:, ::1] z = np.empty((n, k), dtype=np.float64)
    cdef double[:, ::1] g = np.empty((d, k), dtype=np.float64)
    cdef double[:, ::1] m = np.zeros((d, k), dtype=np.float64)
    cdef double[:, ::1] v = np.zeros((d, k), dtype=np.float64)
    cdef double b1t = 1.0, b2t = 1.0
    cdef double scale = 1.0 / (n * k)
    cdef double acc, xv, s, sc, gv, mhat, vhat, norm
    cdef Py_ssize_t t, i, j, c

    with nogil:
        for t in range(epochs):
            # forward: z = x @ weights, then sigmoid + loss + dL/dz in place
            for i in range(n):
                for c in range(k):
                    z[i, c] = 0.0
                for j in range(d):
                    xv = x[i, j]
                    for c in range(k):
                        z[i, c] += xv * weights[j, c]
            acc = 0.0
            for i in range(n):
                for c in range(k):
                    s = 1.0 / (1.0 + exp(-z[i, c]))
                    sc = _clip(s)
                    acc += y[i, c] * log(sc) + (1.0 - y[i, c]) * log(1.0 - sc)
                    z[i, c] = s - y[i, c]
            losses[t] = -acc * scale

            # gradient: g = x.T @ (s - y) * scale
            for j in range(d):
                for c in range(k):
                    g[j, c] = 0.0
            for i in range(n):
                for j in range(d):
                    xv = x[i, j]
                    for c in range(k):
                        g[j, c] += xv * z[i, c]

            b1t *= beta1
            b2t *= beta2
            for j in range(d):
                for c in range(k):
                    gv = g[j, c] * scale
                    m[j, c] = beta1 * m[j, c] + (1.0 - beta1) * gv
                    v[j, c] = beta2 * v[j, c] + (1.0 - beta2) * gv * gv
                    mhat = m[j, c] / (1.0 - b1t)
                    vhat = v[j, c] / (1.0 - b2t)
                    weights[j, c] -= lr * mhat / (sqrt(vhat) + eps)

            if renorm:
                for c in range(k):
                    norm = 0.0
                    for j in range(d):
                        norm += weights[j, c] * weights[j, c]
                    norm = sqrt(norm)
                    for j in range(d):
                        weights[j, c] /= norm

    return losses_arr


def train_softmax(double[:, ::1] weights, double[:, ::1] x, double[:, ::1] y,
                  int epochs, double lr, double beta1, double beta2,
                  double eps, bint renorm):
    """Full-batch cross-entropy + Adam on a softmax head. Mutates ``weights`` in place."""
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1], k = y.shape[1]
    cdef cnp.ndarray losses_arr = np.empty(epochs, dtype=np.float64)
    cdef double[::1] losses = losses_arr
    cdef double[:, ::1] z = np.empty((n, k), dtype=np.float64)
    cdef double[:, ::1] g = np.empty((d, k), dtype=np.float64)
    cdef double[:, ::1] m = np.zeros((d, k), dtype=np.float64)
    cdef double[:, ::1] v = np.zeros((d, k), dtype=np.float64)
    cdef double b1t = 1.0, b2t = 1.0
    cdef double inv_n = 1.0 / n
    cdef double acc, xv, zmax, esum, p, gv, mhat, vhat, norm
    cdef Py_ssize_t t, i, j, c

    with nogil:
        for t in range(epochs):
            for i in range(n):
                for c in range(k):
                    z[i, c] = 0.0
                for j in range(d):
                    xv = x[i, j]
                    for c in range(k):
                        z[i, c] += xv * weights[j, c]
            acc = 0.0
            for i in range(n):
                zmax = z[i, 0]
                for c in range(1, k):
                    if z[i, c] > zmax:
                        zmax = z[i, c]
                esum = 0.0
                for c in range(k):
                    z[i, c] = exp(z[i, c] - zmax)
                    esum += z[i, c]
                for c in range(k):
                    p = z[i, c] / esum
                    acc += y[i, c] * log(_clip(p))
                    z[i, c] = p - y[i, c]
            losses[t] = -acc * inv_n

            for j in range(d):
                for c in range(k):
                    g[j, c] = 0.0
            for i in range(n):
                for j in range(d):
                    xv = x[i, j]
                    for c in range(k):
                        g[j, c] += xv * z[i, c]

            b1t *= beta1
            b2t *= beta2
            for j in range(d):
                for c in range(k):
                    gv = g[j, c] * inv_n
                    m[j, c] = beta1 * m[j, c] + (1.0 - beta1) * gv
                    v[j, c] = beta2 * v[j, c] + (1.0 - beta2) * gv * gv
                    mhat = m[j, c] / (1.0 - b1t)
                    vhat = v[j, c] / (1.0 - b2t)
                    weights[j, c] -= lr * mhat / (sqrt(vhat) + eps)

            if renorm:
                for c in range(k):
                    norm = 0.0
                    for j in range(d):
                        norm += weights[j, c] * weights[j, c]
                    norm = sqrt(norm)
                    for j in range(d):
                        weights[j, c] /= norm

    return losses_arr
