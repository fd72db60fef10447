"""Compiled vs fallback parity for the off-grid evaluation kernel."""

import numpy as np
import pytest

from chflow._kernels import BACKEND, _fallback
from chflow.offgrid import evaluate
from chflow.profiles import band_limited_noise
from chflow.spectral import Grid, derivative

try:
    from chflow._kernels import _ext
except ImportError:
    _ext = None

BACKENDS = [_fallback] if _ext is None else [_fallback, _ext]


def _half(grid, samples):
    c = grid.half_coeffs(samples)
    return np.ascontiguousarray(c.real), np.ascontiguousarray(c.imag)


@pytest.mark.parametrize("impl", BACKENDS)
def test_dense_oracle(impl):
    # brute-force mode sum over the full (two-sided) spectrum
    grid = Grid(11.0, 128)
    f = band_limited_noise(grid, seed=3, kmax_frac=0.4)
    pts = np.random.default_rng(5).uniform(-11, 11, 200)
    c = grid.to_coeffs(f.samples)
    oracle = np.real(np.exp(1j * np.outer(pts, grid.xi)) @ c)
    re, im = _half(grid, f.samples)
    vals, _ = impl.trig_eval(re, im, pts, np.pi / grid.L, False)
    assert np.max(np.abs(vals - oracle)) < 1e-12


@pytest.mark.skipif(_ext is None, reason="compiled kernel not built")
def test_backends_agree():
    grid = Grid(20.0, 512)
    f = band_limited_noise(grid, seed=11, kmax_frac=0.5)
    pts = np.random.default_rng(1).uniform(-60, 60, 333)
    re, im = _half(grid, f.samples)
    va, da = _ext.trig_eval(re, im, pts, np.pi / grid.L, True)
    vb, db = _fallback.trig_eval(re, im, pts, np.pi / grid.L, True)
    scale = np.max(np.abs(vb))
    assert np.max(np.abs(va - vb)) < 1e-11 * scale
    assert np.max(np.abs(da - db)) < 1e-11 * np.max(np.abs(db))


def test_evaluate_reproduces_grid_samples():
    grid = Grid(20.0, 256)
    f = band_limited_noise(grid, seed=2)
    vals = evaluate(f, grid.x)
    assert np.max(np.abs(vals - f.samples)) < 1e-12


def test_evaluate_is_periodic():
    grid = Grid(20.0, 256)
    f = band_limited_noise(grid, seed=9)
    pts = np.random.default_rng(0).uniform(-20, 20, 50)
    a = evaluate(f, pts)
    b = evaluate(f, pts + 2 * grid.L)
    assert np.max(np.abs(a - b)) < 1e-11


def test_derivative_consistent_with_spectral_derivative():
    grid = Grid(20.0, 256)
    f = band_limited_noise(grid, seed=4)
    fx = derivative(f, 1)
    vals, dvals = evaluate(f, grid.x, deriv=True)
    assert np.max(np.abs(dvals - fx.samples)) < 1e-10


def test_backend_selection_reported():
    assert BACKEND in ("compiled", "fallback")
