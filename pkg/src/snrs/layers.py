"""Layer primitives with hand-derived backward passes.

Tensors are plain float64 numpy arrays, C-order.  Two call surfaces:

* per-sample functions (``conv2d_masked``, ``maxpool2``, ...) follow
  the shapes a single lesion patch flows through, e.g. (C, H, W);
* ``*_batch`` variants take lanes-last arrays (..., N) and are what the
  sequencer and trainer actually run.  Per-sample calls delegate to the
  batch path with N=1, and the kernels accumulate per output element in
  a lane-independent order, so both surfaces agree bit-for-bit.

Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import ShapeError


def _f64(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def _check_conv_shapes(inp, weights, mask, bias):
    if inp.ndim != 3:
        raise ShapeError(f"conv input must be (C, H, W), got ndim={inp.ndim}")
    if weights.ndim != 4:
        raise ShapeError(
            f"conv weights must be (O, C, kh, kw), got ndim={weights.ndim}"
        )
    C, H, W = inp.shape
    O, wc, kh, kw = weights.shape
    if wc != C:
        raise ShapeError(
            f"input channels ({C}) != weight in_channels ({wc})"
        )
    if mask.shape != weights.shape:
        raise ShapeError(
            f"mask shape {mask.shape} != weights shape {weights.shape}"
        )
    if bias.shape != (O,):
        raise ShapeError(f"bias shape {bias.shape} != ({O},)")
    if kh > H or kw > W:
        raise ShapeError(
            f"kernel ({kh}x{kw}) larger than input ({H}x{W})"
        )


# -- masked convolution -------------------------------------------------

def conv2d_masked(inp, weights, mask, bias):
    """Valid-padding stride-1 masked convolution of one sample.

    out[o, y, x] = bias[o] + sum_{c,i,j} inp[c, y+i, x+j] *
    weights[o,c,i,j] * mask[o,c,i,j].  Biases are never masked.
    """
    inp, weights, mask, bias = map(_f64, (inp, weights, mask, bias))
    _check_conv_shapes(inp, weights, mask, bias)
    if not np.isin(mask, (0.0, 1.0)).all():
        raise ValueError("mask values must be 0 or 1")
    out = kernels.conv2d_masked_forward(inp[..., None], weights, mask, bias)
    return out[..., 0]


def conv2d_masked_backward(inp, weights, mask, grad_out):
    """Gradients of `conv2d_masked` w.r.t. input, weights, and bias.

    grad_weights is exactly zero wherever mask is zero.
    """
    inp, weights, mask, grad_out = map(_f64, (inp, weights, mask, grad_out))
    _check_conv_shapes(inp, weights, mask, np.zeros(weights.shape[0]))
    oh = inp.shape[1] - weights.shape[2] + 1
    ow = inp.shape[2] - weights.shape[3] + 1
    if grad_out.shape != (weights.shape[0], oh, ow):
        raise ShapeError(
            f"grad_out shape {grad_out.shape} != ({weights.shape[0]}, {oh}, {ow})"
        )
    ginp, gw, gb = kernels.conv2d_masked_backward(
        inp[..., None], weights, mask, grad_out[..., None], True
    )
    return ginp[..., 0], gw, gb


def conv2d_masked_batch(inp, weights, mask, bias):
    """Batched (C, H, W, N) forward; no validation, hot path."""
    return kernels.conv2d_masked_forward(inp, weights, mask, bias)


def conv2d_masked_backward_batch(inp, weights, mask, grad_out, need_ginp=True):
    return kernels.conv2d_masked_backward(inp, weights, mask, grad_out, need_ginp)


# -- 2x2 max pooling ----------------------------------------------------

def maxpool2(inp):
    """Disjoint 2x2 max-pool of one (C, H, W) sample.

    Returns (pooled, argmax) where argmax encodes the within-window
    winner as 2*di+dj; ties go to the first maximum in row-major scan.
    """
    inp = _f64(inp)
    if inp.ndim != 3:
        raise ShapeError(f"pool input must be (C, H, W), got ndim={inp.ndim}")
    _, H, W = inp.shape
    if H % 2 or W % 2:
        raise ShapeError(f"pool input spatial dims must be even, got {H}x{W}")
    out, arg = kernels.maxpool2_forward(inp[..., None])
    return out[..., 0], arg[..., 0]


def maxpool2_backward(arg, grad_out, height, width):
    """Scatter pooled gradients back to the recorded argmax positions."""
    grad_out = _f64(grad_out)
    ginp = kernels.maxpool2_backward(
        arg[..., None], grad_out[..., None], height, width
    )
    return ginp[..., 0]


def maxpool2_batch(inp):
    return kernels.maxpool2_forward(inp)


def maxpool2_backward_batch(arg, grad_out, height, width):
    return kernels.maxpool2_backward(arg, grad_out, height, width)


# -- ReLU ----------------------------------------------------------------

def relu(x):
    """max(0, x) elementwise; works on any shape."""
    return np.maximum(_f64(x), 0.0)


def relu_backward(x, grad_out):
    """Pass gradient where x > 0; the derivative at 0 is taken as 0."""
    x = _f64(x)
    return np.where(x > 0.0, _f64(grad_out), 0.0)


# -- fully connected head ------------------------------------------------

def fully_connected(x, weights, bias):
    """out = weights @ x + bias for a single feature vector."""
    x, weights, bias = map(_f64, (x, weights, bias))
    if weights.ndim != 2 or x.ndim != 1:
        raise ShapeError("fully_connected expects weights (m, n) and x (n,)")
    if weights.shape[1] != x.shape[0]:
        raise ShapeError(
            f"weights n ({weights.shape[1]}) != x length ({x.shape[0]})"
        )
    if bias.shape != (weights.shape[0],):
        raise ShapeError(f"bias shape {bias.shape} != ({weights.shape[0]},)")
    return fully_connected_batch(x[:, None], weights, bias)[:, 0]


def fully_connected_backward(x, weights, grad_out):
    """Gradients (gx, gweights, gbias) of the dense layer."""
    x, weights, grad_out = map(_f64, (x, weights, grad_out))
    if grad_out.shape != (weights.shape[0],):
        raise ShapeError(
            f"grad_out shape {grad_out.shape} != ({weights.shape[0]},)"
        )
    gx, gw, gb = fully_connected_backward_batch(x[:, None], weights, grad_out[:, None])
    return gx[:, 0], gw, gb


def fully_connected_batch(feat, weights, bias):
    # (m, n, 1) * (1, n, N) summed over n; avoids BLAS so the summation
    # order is fixed by numpy alone.
    return (weights[:, :, None] * feat[None, :, :]).sum(axis=1) + bias[:, None]


def fully_connected_backward_batch(feat, weights, grad_out):
    gw = (grad_out[:, None, :] * feat[None, :, :]).sum(axis=2)
    gb = grad_out.sum(axis=1)
    gx = (weights[:, :, None] * grad_out[:, None, :]).sum(axis=0)
    return gx, gw, gb


# -- softmax cross-entropy ----------------------------------------------

def softmax_cross_entropy(logits, true_class):
    """Stabilized softmax cross-entropy loss and its logit gradient.

    Returns (loss, grad) with grad = softmax(logits) - onehot(true_class).
    """
    logits = _f64(logits)
    k = logits.shape[0]
    if k < 2:
        raise ShapeError(f"need at least 2 classes, got {k}")
    if not 0 <= true_class < k:
        raise IndexError(f"true_class {true_class} out of range [0, {k})")
    loss, grad = softmax_cross_entropy_batch(
        logits[:, None], np.array([true_class])
    )
    return float(loss[0]), grad[:, 0]


def softmax_cross_entropy_batch(logits, labels):
    """Column-wise softmax CE: logits (K, N), labels (N,) ints."""
    shifted = logits - logits.max(axis=0, keepdims=True)
    expv = np.exp(shifted)
    total = expv.sum(axis=0, keepdims=True)
    probs = expv / total
    n = np.arange(logits.shape[1])
    loss = np.log(total[0]) - shifted[labels, n]
    grad = probs.copy()
    grad[labels, n] -= 1.0
    return loss, grad


def softmax_batch(logits):
    """Column-wise stabilized softmax probabilities."""
    shifted = logits - logits.max(axis=0, keepdims=True)
    expv = np.exp(shifted)
    return expv / expv.sum(axis=0, keepdims=True)
