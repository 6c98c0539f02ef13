import subprocess
import sys

import numpy as np
import pytest

from seiznet import kernels

needs_numba = pytest.mark.skipif(not kernels.HAS_NUMBA, reason="numba not installed")

SHAPES = [
    (1, 8, 1, 3, 2),    # N, L, C_in, K, C_out
    (4, 21, 3, 5, 6),   # odd length
    (2, 178, 1, 7, 32),
    (3, 44, 16, 3, 8),
]


@needs_numba
@pytest.mark.parametrize("n,length,c_in,k,c_out", SHAPES)
def test_conv_paths_agree(n, length, c_in, k, c_out):
    rng = np.random.default_rng(n * 100 + length)
    x = rng.standard_normal((n, length, c_in))
    w = rng.standard_normal((k, c_in, c_out))
    b = rng.standard_normal(c_out)
    go = rng.standard_normal((n, length, c_out))

    out_np = kernels.conv1d_forward_numpy(x, w, b)
    out_nb = kernels.conv1d_forward_numba(x, w, b)
    assert np.allclose(out_np, out_nb, rtol=1e-9, atol=1e-9)

    for g_np, g_nb in zip(kernels.conv1d_backward_numpy(x, w, go),
                          kernels.conv1d_backward_numba(x, w, go)):
        assert np.allclose(g_np, g_nb, rtol=1e-9, atol=1e-9)


@needs_numba
@pytest.mark.parametrize("n,length,c", [(1, 2, 1), (3, 9, 4), (2, 178, 8)])
def test_maxpool_paths_agree(n, length, c):
    rng = np.random.default_rng(length)
    x = rng.standard_normal((n, length, c))
    out_np, idx_np = kernels.maxpool_forward_numpy(x)
    out_nb, idx_nb = kernels.maxpool_forward_numba(x)
    assert np.array_equal(out_np, out_nb)
    assert np.array_equal(idx_np, idx_nb)

    go = rng.standard_normal(out_np.shape)
    assert np.array_equal(kernels.maxpool_backward_numpy(go, idx_np, length),
                          kernels.maxpool_backward_numba(go, idx_nb, length))


def test_maxpool_tie_goes_to_lower_index():
    x = np.array([[[2.0], [2.0], [5.0], [1.0]]])
    out, idx = kernels.maxpool_forward_numpy(x)
    assert out[0, :, 0].tolist() == [2.0, 5.0]
    assert idx[0, :, 0].tolist() == [0, 0]
    if kernels.HAS_NUMBA:
        out_nb, idx_nb = kernels.maxpool_forward_numba(x)
        assert np.array_equal(idx, idx_nb)


def test_conv_zero_padding_boundaries():
    # interior of a [1,0,-1] difference kernel on a ramp is constant; the
    # boundary positions see zero padding
    x = np.arange(1.0, 6.0)[None, :, None]
    w = np.array([1.0, 0.0, -1.0])[:, None, None]
    b = np.zeros(1)
    out = kernels.conv1d_forward_numpy(x, w, b)[0, :, 0]
    assert np.allclose(out[1:4], [-2.0, -2.0, -2.0])
    assert out[0] == pytest.approx(-2.0)   # 0*1 + 1*0 + 2*(-1)
    assert out[4] == pytest.approx(4.0)    # 4*1 + 5*0 + 0*(-1)


def test_dispatch_matches_flag():
    if kernels.USE_NUMBA:
        assert kernels.conv1d_forward is kernels.conv1d_forward_numba
    else:
        assert kernels.conv1d_forward is kernels.conv1d_forward_numpy


@needs_numba
def test_env_flag_selects_numpy_path():
    code = ("import seiznet.kernels as k; "
            "print(k.USE_NUMBA, k.conv1d_forward.__name__)")
    proc = subprocess.run([sys.executable, "-c", code],
                          env={"SEIZNET_NO_NUMBA": "1", "PATH": "/usr/bin:/bin"},
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "False conv1d_forward_numpy" in proc.stdout
