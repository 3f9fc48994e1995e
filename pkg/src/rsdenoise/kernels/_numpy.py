"""Pure-numpy convolution kernels (fallback backend).

Activations are channels-last ``(batch, length, channels)``; weights are
``(out_channels, in_channels, kernel)``. Stride-1 convolutions use im2col
windows contracted with einsum; the stride-2 transposed convolution is a
per-offset scatter over an uncropped frame.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def conv1d_fwd(x: np.ndarray, w: np.ndarray, bias: np.ndarray | None,
               pad: int) -> np.ndarray:
    """Stride-1 cross-correlation: y[b,t,o] = sum_{c,k} x[b,t+k-pad,c] w[o,c,k]."""
    b_n, length, _ = x.shape
    n_out, _, kernel = w.shape
    out_len = length + 2 * pad - kernel + 1
    if out_len < 1:
        raise ValueError("output length would be < 1")
    xp = np.pad(x, ((0, 0), (pad, pad), (0, 0)))
    win = sliding_window_view(xp, kernel, axis=1)  # (B, Lo, Ci, K)
    y = np.einsum("blck,ock->blo", win, w, optimize=True)
    y = np.ascontiguousarray(y, dtype=x.dtype)
    if bias is not None:
        y += np.asarray(bias, dtype=x.dtype)
    return y


def conv1d_bwd(x: np.ndarray, w: np.ndarray, gy: np.ndarray, pad: int,
               need_input_grad: bool = True):
    """Gradients of :func:`conv1d_fwd` w.r.t. input, weights and bias.

    ``need_input_grad=False`` skips the input gradient (first-layer case).
    """
    b_n, length, c_in = x.shape
    n_out, _, kernel = w.shape
    out_len = gy.shape[1]
    xp = np.pad(x, ((0, 0), (pad, pad), (0, 0)))
    win = sliding_window_view(xp, kernel, axis=1)
    gw = np.einsum("blck,blo->ock", win, gy, optimize=True)
    gb = gy.sum(axis=(0, 1))
    gx = None
    if need_input_grad:
        gxp = np.zeros_like(xp)
        contrib = np.einsum("blo,ock->blck", gy, w, optimize=True)
        for k in range(kernel):
            gxp[:, k:k + out_len, :] += contrib[:, :, :, k]
        gx = np.ascontiguousarray(gxp[:, pad:pad + length, :], dtype=x.dtype)
    return (gx,
            np.ascontiguousarray(gw, dtype=x.dtype),
            np.ascontiguousarray(gb, dtype=x.dtype))


def convtr1d2_fwd(x: np.ndarray, w: np.ndarray, bias: np.ndarray | None,
                  pad: int, out_pad: int) -> np.ndarray:
    """Stride-2 transposed convolution.

    y[b,s,o] = sum over (t,k) with 2t+k-pad = s of x[b,t,c] w[o,c,k],
    output length (L-1)*2 - 2*pad + K + out_pad.
    """
    b_n, length, _ = x.shape
    n_out, _, kernel = w.shape
    out_len = (length - 1) * 2 - 2 * pad + kernel + out_pad
    if out_len < 1:
        raise ValueError("output length would be < 1")
    if not 0 <= out_pad < 2:
        raise ValueError("out_pad must be 0 or 1 for stride 2")
    frame_len = max((length - 1) * 2 + kernel, pad + out_len)
    frame = np.zeros((b_n, frame_len, n_out), dtype=x.dtype)
    contrib = np.einsum("blc,ock->blok", x, w, optimize=True)
    for k in range(kernel):
        frame[:, k:k + 2 * length:2, :] += contrib[:, :, :, k]
    y = frame[:, pad:pad + out_len, :]
    y = np.ascontiguousarray(y)
    if bias is not None:
        y += np.asarray(bias, dtype=x.dtype)
    return y


def convtr1d2_bwd(x: np.ndarray, w: np.ndarray, gy: np.ndarray, pad: int,
                  out_pad: int):
    """Gradients of :func:`convtr1d2_fwd` w.r.t. input, weights and bias."""
    b_n, length, c_in = x.shape
    n_out, _, kernel = w.shape
    out_len = gy.shape[1]
    frame_len = max((length - 1) * 2 + kernel, pad + out_len)
    gframe = np.zeros((b_n, frame_len, n_out), dtype=x.dtype)
    gframe[:, pad:pad + out_len, :] = gy
    # gx[b,t,c] = sum_{o,k} gframe[b, 2t+k, o] w[o,c,k]
    win = sliding_window_view(gframe, kernel, axis=1)[:, ::2, :, :]  # (B,L,Co,K)
    win = win[:, :length]
    gx = np.einsum("blok,ock->blc", win, w, optimize=True)
    gw = np.einsum("blc,blok->ock", x, win, optimize=True)
    gb = gy.sum(axis=(0, 1))
    return (np.ascontiguousarray(gx, dtype=x.dtype),
            np.ascontiguousarray(gw, dtype=x.dtype),
            np.ascontiguousarray(gb, dtype=x.dtype))
