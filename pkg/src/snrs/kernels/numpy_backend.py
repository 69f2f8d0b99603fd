"""Pure-numpy fallback for the hot kernels.

Same contracts and array layout as `numba_backend` (float64, lanes-last
(C, H, W, N)).  The forward path accumulates one weight at a time in
(c, i, j) order, so its outputs are bit-identical to the JIT kernels;
backward reductions use numpy's own summation order, which agrees with
the JIT path to the last few ulps but not bit-for-bit.

This path exists so the package works without a compiler toolchain and
as the reference side of benchmarks/bench_kernels.py; it is selected
with SNRS_BACKEND=numpy.
"""

import numpy as np


def conv2d_masked_forward(inp, weights, mask, bias):
    C, H, W, N = inp.shape
    O, _, kh, kw = weights.shape
    oh = H - kh + 1
    ow = W - kw + 1
    out = np.empty((O, oh, ow, N), dtype=np.float64)
    out[...] = bias[:, None, None, None]
    wm = weights * mask
    for c in range(C):
        for i in range(kh):
            for j in range(kw):
                col = wm[:, c, i, j]
                if not col.any():
                    continue
                window = inp[c, i:i + oh, j:j + ow, :]
                out += col[:, None, None, None] * window[None, :, :, :]
    return out


def conv2d_masked_backward(inp, weights, mask, gout, need_ginp):
    C, H, W, N = inp.shape
    O, _, kh, kw = weights.shape
    oh = gout.shape[1]
    ow = gout.shape[2]

    gb = gout.sum(axis=(1, 2, 3))

    gw = np.empty((O, C, kh, kw), dtype=np.float64)
    for i in range(kh):
        for j in range(kw):
            window = inp[:, i:i + oh, j:j + ow, :]
            gw[:, :, i, j] = np.einsum("oyxn,cyxn->oc", gout, window)
    gw = np.where(mask != 0.0, gw, 0.0)

    ginp = np.zeros((C, H, W, N), dtype=np.float64)
    if need_ginp:
        wm = weights * mask
        for o in range(O):
            g = gout[o]
            for i in range(kh):
                for j in range(kw):
                    col = wm[o, :, i, j]
                    if not col.any():
                        continue
                    ginp[:, i:i + oh, j:j + ow, :] += col[:, None, None, None] * g[None, :, :, :]
    return ginp, gw, gb


def maxpool2_forward(inp):
    C, H, W, N = inp.shape
    oh = H // 2
    ow = W // 2
    # (C, oh, 2, ow, 2, N) -> windows flattened row-major so argmax's
    # first-maximum rule matches the JIT kernel's tie-break.
    windows = inp.reshape(C, oh, 2, ow, 2, N).transpose(0, 1, 3, 2, 4, 5).reshape(C, oh, ow, 4, N)
    arg = windows.argmax(axis=3).astype(np.uint8)
    out = np.take_along_axis(windows, arg[:, :, :, None, :].astype(np.int64), axis=3)[:, :, :, 0, :]
    return np.ascontiguousarray(out), arg


def maxpool2_backward(arg, gout, H, W):
    C, oh, ow, N = gout.shape
    ginp = np.zeros((C, H, W, N), dtype=np.float64)
    di = (arg >> 1).astype(np.int64)
    dj = (arg & 1).astype(np.int64)
    cs, ys, xs, ns = np.indices((C, oh, ow, N), sparse=True)
    np.add.at(ginp, (cs, 2 * ys + di, 2 * xs + dj, ns), gout)
    return ginp
