"""Training kernel backend selection.

The compiled extension is preferred when importable; the numpy backend is
the fallback. ``MWI_KERNELS=python`` or ``MWI_KERNELS=cython`` forces a
backend (the latter raises if the extension is missing). Both backends
implement the same contract: ``train_sigmoid`` / ``train_softmax`` mutate a
C-contiguous float64 (D, K) weight matrix in place and return the per-epoch
loss trace.
"""

import os

from . import _python

_requested = os.environ.get("MWI_KERNELS", "auto").lower()
if _requested not in ("auto", "cython", "python"):
    raise ValueError(f"MWI_KERNELS must be auto, cython, or python, not {_requested!r}")

if _requested == "python":
    _impl = _python
    BACKEND = "python"
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        _impl = _python
        BACKEND = "python"

train_sigmoid = _impl.train_sigmoid
train_softmax = _impl.train_softmax

# analytic pieces shared with tests and the finite-difference checks
sigmoid = _python.sigmoid
softmax_rows = _python.softmax_rows
bce_loss = _python.bce_loss
bce_gradient = _python.bce_gradient
ce_loss = _python.ce_loss
ce_gradient = _python.ce_gradient

__all__ = [
    "BACKEND",
    "train_sigmoid",
    "train_softmax",
    "sigmoid",
    "softmax_rows",
    "bce_loss",
    "bce_gradient",
    "ce_loss",
    "ce_gradient",
]
