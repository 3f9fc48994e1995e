# cython: boundscheck=False, wraparound=False, cdivision=True
"""BLAS-backed convolution kernels (compiled backend).

Same contract as the numpy fallback, but each convolution is expressed as
a handful of accumulating GEMM calls on diagonal slices of padded
channels-last frames, avoiding im2col copies entirely. Per-batch frame
padding is sized so shifted reads never cross batch-block boundaries.
"""

import numpy as np

from scipy.linalg.cython_blas cimport dgemm, sgemm

ctypedef fused real:
    float
    double

cdef char TRANS_N = 78  # 'N'
cdef char TRANS_T = 84  # 'T'


cdef inline void _gemm(char ta, char tb, int m, int n, int k, real* a,
                       int lda, real* b, int ldb, real beta, real* c,
                       int ldc) noexcept nogil:
    cdef float alpha_s = 1.0, beta_s
    cdef double alpha_d = 1.0, beta_d
    if real is float:
        beta_s = <float> beta
        sgemm(&ta, &tb, &m, &n, &k, &alpha_s, <float*> a, &lda,
              <float*> b, &ldb, &beta_s, <float*> c, &ldc)
    else:
        beta_d = <double> beta
        dgemm(&ta, &tb, &m, &n, &k, &alpha_d, <double*> a, &lda,
              <double*> b, &ldb, &beta_d, <double*> c, &ldc)


def _conv1d_fwd_impl(real[:, :, ::1] xp, real[:, :, ::1] w2,
                     real[:, :, ::1] yf):
    """yf[rows] += xp[rows + k] @ w2[k] for every kernel offset k."""
    cdef int b_n = xp.shape[0]
    cdef int lp = xp.shape[1]
    cdef int ci = xp.shape[2]
    cdef int kernel = w2.shape[0]
    cdef int co = w2.shape[2]
    cdef int n_rows = b_n * lp
    cdef int band = n_rows - (kernel - 1)
    cdef int k
    cdef real beta
    cdef real* xptr = &xp[0, 0, 0]
    cdef real* yptr = &yf[0, 0, 0]
    with nogil:
        for k in range(kernel):
            beta = 0.0 if k == 0 else 1.0
            _gemm(TRANS_N, TRANS_N, co, band, ci, &w2[k, 0, 0], co,
                  xptr + k * ci, ci, beta, yptr, co)


def _conv1d_wgrad_impl(real[:, :, ::1] xp, real[:, :, ::1] gyf,
                       real[:, :, ::1] gw2):
    """gw2[k] = xp[rows + k].T @ gyf[rows] (gyf zero outside valid rows)."""
    cdef int b_n = xp.shape[0]
    cdef int lp = xp.shape[1]
    cdef int ci = xp.shape[2]
    cdef int kernel = gw2.shape[0]
    cdef int co = gyf.shape[2]
    cdef int n_rows = b_n * lp
    cdef int band = n_rows - (kernel - 1)
    cdef int k
    cdef real* xptr = &xp[0, 0, 0]
    cdef real* gyptr = &gyf[0, 0, 0]
    with nogil:
        for k in range(kernel):
            _gemm(TRANS_N, TRANS_T, co, ci, band, gyptr, co, xptr + k * ci, ci,
                  <real> 0.0, &gw2[k, 0, 0], co)


def _convtr2_fwd_impl(real[:, :, ::1] xf, real[:, :, ::1] w2,
                      real[:, :, ::1] frame0, real[:, :, ::1] frame1,
                      int pad):
    """Scatter x @ w2[k] into the even/odd phase frame at offset shifts."""
    cdef int b_n = xf.shape[0]
    cdef int lf = xf.shape[1]
    cdef int ci = xf.shape[2]
    cdef int kernel = w2.shape[0]
    cdef int co = w2.shape[2]
    cdef int n_rows = b_n * lf
    cdef int qmin = -((pad + 1) // 2)
    cdef int k, delta, q, r, shift
    cdef real* xptr = &xf[0, 0, 0]
    cdef real* fptr
    with nogil:
        for k in range(kernel):
            delta = k - pad
            q = delta >> 1
            r = delta - 2 * q
            shift = q - qmin
            fptr = &frame0[0, 0, 0] if r == 0 else &frame1[0, 0, 0]
            _gemm(TRANS_N, TRANS_N, co, n_rows - shift, ci, &w2[k, 0, 0], co,
                  xptr, ci, <real> 1.0, fptr + shift * co, co)


def _convtr2_bwd_impl(real[:, :, ::1] xf, real[:, :, ::1] w2,
                      real[:, :, ::1] gyf0, real[:, :, ::1] gyf1,
                      real[:, :, ::1] gxf, real[:, :, ::1] gw2, int pad):
    """Input and weight gradients of the stride-2 transposed convolution."""
    cdef int b_n = xf.shape[0]
    cdef int lf = xf.shape[1]
    cdef int ci = xf.shape[2]
    cdef int kernel = w2.shape[0]
    cdef int co = gyf0.shape[2]
    cdef int n_rows = b_n * lf
    cdef int qmin = -((pad + 1) // 2)
    cdef int k, delta, q, r, shift
    cdef real* xptr = &xf[0, 0, 0]
    cdef real* gxptr = &gxf[0, 0, 0]
    cdef real* gyptr
    with nogil:
        for k in range(kernel):
            delta = k - pad
            q = delta >> 1
            r = delta - 2 * q
            shift = q - qmin
            gyptr = (&gyf0[0, 0, 0] if r == 0 else &gyf1[0, 0, 0]) + shift * co
            # gx[t] += gy_phase[t + shift] @ w2[k].T
            _gemm(TRANS_T, TRANS_N, ci, n_rows - shift, co, &w2[k, 0, 0], co,
                  gyptr, co, <real> 1.0, gxptr, ci)
            # gw2[k] = xf[t].T @ gy_phase[t + shift]
            _gemm(TRANS_N, TRANS_T, co, ci, n_rows - shift, gyptr, co, xptr, ci,
                  <real> 0.0, &gw2[k, 0, 0], co)


def _slabs(w):
    # (Co, Ci, K) -> per-offset (K, Ci, Co) slabs, each a BLAS-ready matrix
    return np.ascontiguousarray(w.transpose(2, 1, 0))


def conv1d_fwd(x, w, bias, pad):
    b_n, length, c_in = x.shape
    n_out, _, kernel = w.shape
    out_len = length + 2 * pad - kernel + 1
    if out_len < 1:
        raise ValueError("output length would be < 1")
    lp = length + 2 * pad
    xp = np.zeros((b_n, lp, c_in), dtype=x.dtype)
    xp[:, pad:pad + length, :] = x
    yf = np.empty((b_n, lp, n_out), dtype=x.dtype)
    _conv1d_fwd_impl(xp, _slabs(w), yf)
    y = np.ascontiguousarray(yf[:, :out_len, :])
    if bias is not None:
        y += np.asarray(bias, dtype=x.dtype)
    return y


def conv1d_bwd(x, w, gy, pad, need_input_grad=True):
    b_n, length, c_in = x.shape
    n_out, _, kernel = w.shape
    out_len = gy.shape[1]
    gx = None
    if need_input_grad:
        # input grad is a stride-1 convolution of gy with the flipped transpose
        w_flip = np.ascontiguousarray(w.transpose(1, 0, 2)[:, :, ::-1])
        gx = conv1d_fwd(np.ascontiguousarray(gy), w_flip, None,
                        kernel - 1 - pad)
    lp = length + 2 * pad
    xp = np.zeros((b_n, lp, c_in), dtype=x.dtype)
    xp[:, pad:pad + length, :] = x
    gyf = np.zeros((b_n, lp, n_out), dtype=x.dtype)
    gyf[:, :out_len, :] = gy
    gw2 = np.empty((kernel, c_in, n_out), dtype=x.dtype)
    _conv1d_wgrad_impl(xp, gyf, gw2)
    gw = np.ascontiguousarray(gw2.transpose(2, 1, 0))
    gb = np.ascontiguousarray(gy.sum(axis=(0, 1)))
    return gx, gw, gb


def _phase_geometry(length, kernel, pad, out_pad):
    if not 0 <= out_pad < 2:
        raise ValueError("out_pad must be 0 or 1 for stride 2")
    out_len = (length - 1) * 2 - 2 * pad + kernel + out_pad
    qmin = -((pad + 1) // 2)
    qmax = (kernel - 1 - pad) >> 1
    # frame must cover both the scatter band and the phase-wise crop
    frame_len = max(length + qmax - qmin, -qmin + (out_len + 1) // 2)
    return out_len, qmin, frame_len


def convtr1d2_fwd(x, w, bias, pad, out_pad):
    b_n, length, c_in = x.shape
    n_out, _, kernel = w.shape
    out_len, qmin, frame_len = _phase_geometry(length, kernel, pad, out_pad)
    if out_len < 1:
        raise ValueError("output length would be < 1")
    xf = np.zeros((b_n, frame_len, c_in), dtype=x.dtype)
    xf[:, :length, :] = x
    frame0 = np.zeros((b_n, frame_len, n_out), dtype=x.dtype)
    frame1 = np.zeros((b_n, frame_len, n_out), dtype=x.dtype)
    _convtr2_fwd_impl(xf, _slabs(w), frame0, frame1, pad)
    y = np.empty((b_n, out_len, n_out), dtype=x.dtype)
    for r, frame in ((0, frame0), (1, frame1)):
        count = (out_len - r + 1) // 2
        y[:, r::2, :] = frame[:, -qmin:-qmin + count, :]
    if bias is not None:
        y += np.asarray(bias, dtype=x.dtype)
    return y


def convtr1d2_bwd(x, w, gy, pad, out_pad):
    b_n, length, c_in = x.shape
    n_out, _, kernel = w.shape
    out_len, qmin, frame_len = _phase_geometry(length, kernel, pad, out_pad)
    xf = np.zeros((b_n, frame_len, c_in), dtype=x.dtype)
    xf[:, :length, :] = x
    gyf0 = np.zeros((b_n, frame_len, n_out), dtype=x.dtype)
    gyf1 = np.zeros((b_n, frame_len, n_out), dtype=x.dtype)
    for r, gyf in ((0, gyf0), (1, gyf1)):
        count = (out_len - r + 1) // 2
        gyf[:, -qmin:-qmin + count, :] = gy[:, r::2, :]
    gxf = np.zeros((b_n, frame_len, c_in), dtype=x.dtype)
    gw2 = np.empty((kernel, c_in, n_out), dtype=x.dtype)
    _convtr2_bwd_impl(xf, _slabs(w), gyf0, gyf1, gxf, gw2, pad)
    gx = np.ascontiguousarray(gxf[:, :length, :])
    gw = np.ascontiguousarray(gw2.transpose(2, 1, 0))
    gb = np.ascontiguousarray(gy.sum(axis=(0, 1)))
    return gx, gw, gb
