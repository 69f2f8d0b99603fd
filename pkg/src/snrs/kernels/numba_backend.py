"""JIT-compiled hot kernels (masked convolution, 2x2 max-pool).

Arrays are float64, C-contiguous, lanes-last: a batch of N samples with
C channels of HxW pixels is shaped (C, H, W, N).  The innermost loop of
every kernel runs over the N lanes so LLVM can vectorize it without
reassociating any per-element sum: for each output element the terms
are accumulated in (c, i, j) order, one weight at a time.  Single-lane
calls (N=1) therefore produce bit-identical values to batched calls.

Weights whose mask bit is 0 are skipped entirely; that is what makes a
p=0.5 sequencer roughly twice as fast as its dense counterpart (see
benchmarks/bench_kernels.py).

No fastmath, no threading: results are reproducible run to run and
across machines.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def conv2d_masked_forward(inp, weights, mask, bias):
    """Valid-padding stride-1 correlation with a per-weight binary mask.

    Parameters
    ----------
    inp : (C, H, W, N) float64
    weights : (O, C, kh, kw) float64
    mask : (O, C, kh, kw) float64, values in {0.0, 1.0}
    bias : (O,) float64

    Returns
    -------
    (O, H-kh+1, W-kw+1, N) float64
    """
    C, H, W, N = inp.shape
    O, _, kh, kw = weights.shape
    oh = H - kh + 1
    ow = W - kw + 1
    out = np.empty((O, oh, ow, N), dtype=np.float64)
    for o in range(O):
        out[o, :, :, :] = bias[o]
        for c in range(C):
            for i in range(kh):
                for j in range(kw):
                    if mask[o, c, i, j] == 0.0:
                        continue
                    w = weights[o, c, i, j]
                    for y in range(oh):
                        for x in range(ow):
                            for n in range(N):
                                out[o, y, x, n] += inp[c, y + i, x + j, n] * w
    return out


@njit(cache=True)
def conv2d_masked_backward(inp, weights, mask, gout, need_ginp):
    """Gradients of conv2d_masked_forward.

    gout is (O, oh, ow, N).  Returns (ginp, gweights, gbias); gradients
    at masked weight slots are exactly 0.0 (never computed).  When
    need_ginp is False the input gradient is returned as zeros without
    being computed (first-layer optimization).
    """
    C, H, W, N = inp.shape
    O, _, kh, kw = weights.shape
    oh = gout.shape[1]
    ow = gout.shape[2]

    gw = np.zeros((O, C, kh, kw), dtype=np.float64)
    gb = np.zeros(O, dtype=np.float64)
    ginp = np.zeros((C, H, W, N), dtype=np.float64)
    acc = np.empty(N, dtype=np.float64)

    for o in range(O):
        s = 0.0
        for y in range(oh):
            for x in range(ow):
                for n in range(N):
                    s += gout[o, y, x, n]
        gb[o] = s

    for o in range(O):
        for c in range(C):
            for i in range(kh):
                for j in range(kw):
                    if mask[o, c, i, j] == 0.0:
                        continue
                    acc[:] = 0.0
                    for y in range(oh):
                        for x in range(ow):
                            for n in range(N):
                                acc[n] += gout[o, y, x, n] * inp[c, y + i, x + j, n]
                    s = 0.0
                    for n in range(N):
                        s += acc[n]
                    gw[o, c, i, j] = s

    if need_ginp:
        for o in range(O):
            for c in range(C):
                for i in range(kh):
                    for j in range(kw):
                        if mask[o, c, i, j] == 0.0:
                            continue
                        w = weights[o, c, i, j]
                        for y in range(oh):
                            for x in range(ow):
                                for n in range(N):
                                    ginp[c, y + i, x + j, n] += gout[o, y, x, n] * w

    return ginp, gw, gb


@njit(cache=True)
def maxpool2_forward(inp):
    """Disjoint 2x2 max-pool.

    Returns (out, arg) where out is (C, H/2, W/2, N) and arg holds the
    within-window argmax encoded as 2*di+dj (uint8).  Ties resolve to
    the first maximum in row-major window order.
    """
    C, H, W, N = inp.shape
    oh = H // 2
    ow = W // 2
    out = np.empty((C, oh, ow, N), dtype=np.float64)
    arg = np.empty((C, oh, ow, N), dtype=np.uint8)
    for c in range(C):
        for y in range(oh):
            for x in range(ow):
                for n in range(N):
                    best = inp[c, 2 * y, 2 * x, n]
                    code = 0
                    for di in range(2):
                        for dj in range(2):
                            v = inp[c, 2 * y + di, 2 * x + dj, n]
                            if v > best:
                                best = v
                                code = 2 * di + dj
                    out[c, y, x, n] = best
                    arg[c, y, x, n] = code
    return out, arg


@njit(cache=True)
def maxpool2_backward(arg, gout, H, W):
    """Route pooled gradients back to the recorded argmax positions."""
    C, oh, ow, N = gout.shape
    ginp = np.zeros((C, H, W, N), dtype=np.float64)
    for c in range(C):
        for y in range(oh):
            for x in range(ow):
                for n in range(N):
                    code = arg[c, y, x, n]
                    di = code // 2
                    dj = code % 2
                    ginp[c, 2 * y + di, 2 * x + dj, n] += gout[c, y, x, n]
    return ginp
