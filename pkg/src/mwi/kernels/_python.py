"""Numpy implementation of the training kernels.

Reference backend; the compiled extension in ``_speedups.pyx`` mirrors these
loops operation-for-operation. Both run full-batch Adam with optional
per-step column renormalization and return the per-epoch loss trace (the
loss evaluated before each update).
"""

from __future__ import annotations

import numpy as np

CLIP_LO = 1e-12
CLIP_HI = 1.0 - 1e-12


def sigmoid(z: np.ndarray) -> np.ndarray:
    # exp overflow for very negative z saturates to inf and the quotient
    # to exactly 0.0, matching the compiled backend's libc behavior
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


def bce_loss(weights: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    """Mean binary cross-entropy over all example-class cells, activations clamped."""
    s = np.clip(sigmoid(x @ weights), CLIP_LO, CLIP_HI)
    n, k = y.shape
    return float(-(y * np.log(s) + (1.0 - y) * np.log(1.0 - s)).sum() / (n * k))


def bce_gradient(weights: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Analytic gradient of :func:`bce_loss` with respect to the weights."""
    n, k = y.shape
    s = sigmoid(x @ weights)
    return x.T @ (s - y) / (n * k)


def softmax_rows(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def ce_loss(weights: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    """Mean cross-entropy over rows for one-hot targets, activations clamped."""
    p = np.clip(softmax_rows(x @ weights), CLIP_LO, CLIP_HI)
    n = y.shape[0]
    return float(-(y * np.log(p)).sum() / n)


def ce_gradient(weights: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    n = y.shape[0]
    p = softmax_rows(x @ weights)
    return x.T @ (p - y) / n


def _adam_loop(weights, x, y, loss_fn, grad_fn, epochs, lr, beta1, beta2, eps, renorm):
    m = np.zeros_like(weights)
    v = np.zeros_like(weights)
    losses = np.empty(epochs, dtype=np.float64)
    b1t = 1.0
    b2t = 1.0
    for t in range(epochs):
        losses[t] = loss_fn(weights, x, y)
        g = grad_fn(weights, x, y)
        b1t *= beta1
        b2t *= beta2
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        mhat = m / (1.0 - b1t)
        vhat = v / (1.0 - b2t)
        weights -= lr * mhat / (np.sqrt(vhat) + eps)
        if renorm:
            weights /= np.linalg.norm(weights, axis=0)
    return losses


def train_sigmoid(weights, x, y, epochs, lr, beta1, beta2, eps, renorm):
    """Full-batch BCE + Adam on a sigmoid head. Mutates ``weights`` in place."""
    return _adam_loop(weights, x, y, bce_loss, bce_gradient, epochs, lr, beta1, beta2, eps, renorm)


def train_softmax(weights, x, y, epochs, lr, beta1, beta2, eps, renorm):
    """Full-batch cross-entropy + Adam on a softmax head. Mutates ``weights`` in place."""
    return _adam_loop(weights, x, y, ce_loss, ce_gradient, epochs, lr, beta1, beta2, eps, renorm)
