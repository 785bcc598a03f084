"""Softmax and cross-entropy kernels with optional compiled fast path.

The training loop spends nearly all of its non-GEMM time in row softmax
and the fused cross-entropy loss/gradient. Both exist twice: a numpy
implementation that always works, and a compiled extension built from
``_ckernels.pyx`` when Cython and a C compiler were available at install
time. The backend is chosen once at import; set the ``SPANTAG_PURE``
environment variable to any non-empty value to force the numpy path.

Both backends satisfy the same contract. ``xent_grad`` returns

    loss_sum   = sum_i w_i * (-log softmax(logits_i)[y_i])
    weight_sum = sum_i w_i
    dlogits    = rows w_i * (softmax(logits_i) - onehot(y_i))

where w_i = class_weights[y_i], or 1 when no weights are given. Callers
divide by ``weight_sum`` to get means.
"""

from __future__ import annotations

import os

import numpy as np

_EMPTY_WEIGHTS = np.zeros(0, dtype=np.float64)


def _softmax_rows_np(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    np.exp(shifted, out=shifted)
    shifted /= shifted.sum(axis=1, keepdims=True)
    return shifted


def _xent_grad_np(
    logits: np.ndarray, labels: np.ndarray, class_weights: np.ndarray
) -> tuple[float, float, np.ndarray]:
    n = logits.shape[0]
    rows = np.arange(n)
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    denom = exp.sum(axis=1)
    log_probs = shifted[rows, labels] - np.log(denom)
    dlogits = exp / denom[:, None]
    dlogits[rows, labels] -= 1.0
    if class_weights.size:
        w = class_weights[labels]
        dlogits *= w[:, None]
        return float(-(w * log_probs).sum()), float(w.sum()), dlogits
    return float(-log_probs.sum()), float(n), dlogits


_force_pure = bool(os.environ.get("SPANTAG_PURE"))
try:
    if _force_pure:
        raise ImportError("numpy backend forced by SPANTAG_PURE")
    from . import _ckernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "pure"
HAVE_COMPILED = _compiled is not None


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax; each output row sums to 1."""
    logits = np.ascontiguousarray(logits, dtype=np.float64)
    if logits.size == 0:
        return logits.copy()
    if _compiled is not None:
        return _compiled.softmax_rows(logits)
    return _softmax_rows_np(logits)


def xent_grad(
    logits: np.ndarray,
    labels: np.ndarray,
    class_weights: np.ndarray | None = None,
) -> tuple[float, float, np.ndarray]:
    """Fused cross-entropy loss and logit gradient for one batch.

    ``labels`` holds one class index per row; ``class_weights`` is either
    None (unweighted) or one weight per class.
    """
    logits = np.ascontiguousarray(logits, dtype=np.float64)
    labels = np.ascontiguousarray(labels, dtype=np.intp)
    n, n_classes = logits.shape
    if labels.shape != (n,):
        raise ValueError(f"labels shape {labels.shape} does not match {n} logit rows")
    if n and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValueError(f"label out of range for {n_classes} classes")
    if class_weights is None:
        weights = _EMPTY_WEIGHTS
    else:
        weights = np.ascontiguousarray(class_weights, dtype=np.float64)
        if weights.shape != (n_classes,):
            raise ValueError(
                f"class_weights shape {weights.shape} does not match {n_classes} classes"
            )
    if n == 0:
        return 0.0, 0.0, np.zeros_like(logits)
    if _compiled is not None:
        return _compiled.xent_grad(logits, labels, weights)
    return _xent_grad_np(logits, labels, weights)
