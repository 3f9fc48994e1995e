"""Backend-agnostic kernel checks against direct-summation oracles.

The oracles below intentionally use naive nested loops; they are the
ground truth both backends (numpy fallback and compiled) must match.
"""

import numpy as np
import pytest

import rsdenoise.kernels as kernels
from rsdenoise.kernels import get_backend, maxpool2_bwd, maxpool2_fwd


def brute_conv1d(x, w, bias, pad):
    b_n, length, c_in = x.shape
    n_out, _, kernel = w.shape
    out_len = length + 2 * pad - kernel + 1
    y = np.zeros((b_n, out_len, n_out))
    for b in range(b_n):
        for o in range(n_out):
            for t in range(out_len):
                acc = 0.0
                for c in range(c_in):
                    for k in range(kernel):
                        j = t + k - pad
                        if 0 <= j < length:
                            acc += x[b, j, c] * w[o, c, k]
                y[b, t, o] = acc + (bias[o] if bias is not None else 0.0)
    return y


def brute_convtr1d2(x, w, bias, pad, out_pad):
    b_n, length, c_in = x.shape
    n_out, _, kernel = w.shape
    out_len = (length - 1) * 2 - 2 * pad + kernel + out_pad
    y = np.zeros((b_n, out_len, n_out))
    for b in range(b_n):
        for o in range(n_out):
            for t in range(length):
                for c in range(c_in):
                    for k in range(kernel):
                        s = 2 * t + k - pad
                        if 0 <= s < out_len:
                            y[b, s, o] += x[b, t, c] * w[o, c, k]
    if bias is not None:
        y += bias
    return y


def random_case(seed):
    g = np.random.default_rng(seed)
    b_n = int(g.integers(1, 4))
    length = int(g.integers(6, 24)) * 2
    c_in = int(g.integers(1, 5))
    c_out = int(g.integers(1, 6))
    kernel = int(g.choice([3, 5, 11]))
    x = g.standard_normal((b_n, length, c_in))
    w = g.standard_normal((c_out, c_in, kernel))
    bias = g.standard_normal(c_out)
    return g, x, w, bias, kernel


BACKENDS = ["numpy"]
if kernels.BACKEND == "cython":
    BACKENDS.append("cython")


@pytest.fixture(params=BACKENDS)
def backend(request):
    return get_backend(request.param)


class TestConvForward:
    @pytest.mark.parametrize("seed", range(5))
    def test_matches_brute_force(self, backend, seed):
        g, x, w, bias, kernel = random_case(seed)
        pad = int(g.integers(0, kernel))
        if x.shape[1] + 2 * pad - kernel + 1 < 1:
            pytest.skip("degenerate output length")
        expected = brute_conv1d(x, w, bias, pad)
        got = backend.conv1d_fwd(x, w, bias, pad)
        assert np.abs(got - expected).max() < 1e-12

    def test_float32_dtype_preserved(self, backend):
        g, x, w, bias, _ = random_case(42)
        y = backend.conv1d_fwd(x.astype(np.float32), w.astype(np.float32),
                               bias.astype(np.float32), 5)
        assert y.dtype == np.float32


class TestConvBackward:
    @pytest.mark.parametrize("seed", range(5))
    def test_matches_finite_differences(self, backend, seed):
        g, x, w, bias, kernel = random_case(100 + seed)
        pad = kernel // 2
        y = brute_conv1d(x, w, bias, pad)
        gy = g.standard_normal(y.shape)
        gx, gw, gb = backend.conv1d_bwd(x, w, gy, pad)
        h = 1e-6
        for arr, grad in ((x, gx), (w, gw)):
            flat = arr.ravel()
            idxs = g.choice(flat.size, size=min(10, flat.size), replace=False)
            for i in idxs:
                old = flat[i]
                flat[i] = old + h
                yp = brute_conv1d(x, w, bias, pad)
                flat[i] = old - h
                ym = brute_conv1d(x, w, bias, pad)
                flat[i] = old
                fd = np.sum((yp - ym) * gy) / (2 * h)
                assert grad.ravel()[i] == pytest.approx(fd, rel=1e-5, abs=1e-7)
        assert np.allclose(gb, gy.sum(axis=(0, 1)))

    def test_skip_input_grad(self, backend):
        g, x, w, bias, kernel = random_case(7)
        y = backend.conv1d_fwd(x, w, bias, kernel // 2)
        gx, gw, gb = backend.conv1d_bwd(x, w, y, kernel // 2,
                                        need_input_grad=False)
        assert gx is None
        assert gw.shape == w.shape


class TestConvTranspose:
    @pytest.mark.parametrize("seed", range(5))
    def test_forward_matches_brute_force(self, backend, seed):
        g, x, w, bias, kernel = random_case(200 + seed)
        pad = int(g.integers(0, kernel))
        out_pad = int(g.integers(0, 2))
        if (x.shape[1] - 1) * 2 - 2 * pad + kernel + out_pad < 1:
            pytest.skip("degenerate output length")
        expected = brute_convtr1d2(x, w, bias, pad, out_pad)
        got = backend.convtr1d2_fwd(x, w, bias, pad, out_pad)
        assert got.shape == expected.shape
        assert np.abs(got - expected).max() < 1e-12

    @pytest.mark.parametrize("seed", range(3))
    def test_backward_matches_finite_differences(self, backend, seed):
        g, x, w, bias, kernel = random_case(300 + seed)
        pad, out_pad = kernel // 2, 1
        y = brute_convtr1d2(x, w, bias, pad, out_pad)
        gy = g.standard_normal(y.shape)
        gx, gw, gb = backend.convtr1d2_bwd(x, w, gy, pad, out_pad)
        h = 1e-6
        for arr, grad in ((x, gx), (w, gw)):
            flat = arr.ravel()
            idxs = g.choice(flat.size, size=min(8, flat.size), replace=False)
            for i in idxs:
                old = flat[i]
                flat[i] = old + h
                yp = brute_convtr1d2(x, w, bias, pad, out_pad)
                flat[i] = old - h
                ym = brute_convtr1d2(x, w, bias, pad, out_pad)
                flat[i] = old
                fd = np.sum((yp - ym) * gy) / (2 * h)
                assert grad.ravel()[i] == pytest.approx(fd, rel=1e-5, abs=1e-7)
        assert np.allclose(gb, gy.sum(axis=(0, 1)))

    def test_exact_doubling_geometry(self, backend):
        # kernel 11, pad 5, out_pad 1 doubles the length exactly
        g = np.random.default_rng(0)
        x = g.standard_normal((2, 23, 3))
        w = g.standard_normal((4, 3, 11))
        y = backend.convtr1d2_fwd(x, w, None, 5, 1)
        assert y.shape == (2, 46, 4)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend unavailable")
class TestBackendParity:
    @pytest.mark.parametrize("seed", range(8))
    def test_all_primitives_agree(self, seed):
        npk, cyk = get_backend("numpy"), get_backend("cython")
        g, x, w, bias, kernel = random_case(400 + seed)
        pad = kernel // 2
        y1 = npk.conv1d_fwd(x, w, bias, pad)
        y2 = cyk.conv1d_fwd(x, w, bias, pad)
        assert np.abs(y1 - y2).max() < 1e-11
        gy = g.standard_normal(y1.shape)
        for a, b in zip(npk.conv1d_bwd(x, w, gy, pad),
                        cyk.conv1d_bwd(x, w, gy, pad)):
            assert np.abs(np.asarray(a) - np.asarray(b)).max() < 1e-11
        yt1 = npk.convtr1d2_fwd(x, w, bias, pad, 1)
        yt2 = cyk.convtr1d2_fwd(x, w, bias, pad, 1)
        assert np.abs(yt1 - yt2).max() < 1e-11
        gyt = g.standard_normal(yt1.shape)
        for a, b in zip(npk.convtr1d2_bwd(x, w, gyt, pad, 1),
                        cyk.convtr1d2_bwd(x, w, gyt, pad, 1)):
            assert np.abs(np.asarray(a) - np.asarray(b)).max() < 1e-11


class TestMaxPool:
    def test_values_and_ties(self):
        x = np.array([[[1.0], [3.0], [2.0], [2.0], [5.0], [-1.0]]])
        y, idx = maxpool2_fwd(x)
        assert y[0, :, 0].tolist() == [3.0, 2.0, 5.0]
        # tie in window (2,2) resolves to the lower index
        assert idx[0, :, 0].tolist() == [1, 0, 0]

    def test_backward_routing(self):
        g = np.random.default_rng(3)
        x = g.standard_normal((2, 8, 3))
        y, idx = maxpool2_fwd(x)
        gy = g.standard_normal(y.shape)
        gx = maxpool2_bwd(gy, idx)
        h = 1e-6
        flat = x.ravel()
        for i in g.choice(flat.size, size=10, replace=False):
            old = flat[i]
            flat[i] = old + h
            yp, _ = maxpool2_fwd(x)
            flat[i] = old - h
            ym, _ = maxpool2_fwd(x)
            flat[i] = old
            fd = np.sum((yp - ym) * gy) / (2 * h)
            assert gx.ravel()[i] == pytest.approx(fd, rel=1e-5, abs=1e-9)

    def test_odd_length_rejected(self):
        with pytest.raises(ValueError, match="even"):
            maxpool2_fwd(np.zeros((1, 7, 1)))
