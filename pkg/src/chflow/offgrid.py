"""Off-grid evaluation of fields by exact trigonometric interpolation."""

import numpy as np

from ._kernels import trig_eval
from .spectral import RealField


def evaluate(f: RealField, points, deriv: bool = False):
    """Evaluate the trigonometric interpolant of f at arbitrary points.

    Exact (to round-off) on band-limited fields; periodic in 2L, so points
    may lie outside [-L, L).  With deriv=True also returns the spectral
    derivative of the interpolant, consistent with spectral.derivative.
    """
    c = f.grid.half_coeffs(f.samples)
    pts = np.ascontiguousarray(points, dtype=float)
    vals, dvals = trig_eval(
        np.ascontiguousarray(c.real),
        np.ascontiguousarray(c.imag),
        pts,
        np.pi / f.grid.L,
        deriv,
    )
    return (vals, dvals) if deriv else vals


def evaluate_samples(grid, samples, points, deriv: bool = False):
    """Array-level variant of :func:`evaluate` for hot loops."""
    c = grid.half_coeffs(samples)
    vals, dvals = trig_eval(
        np.ascontiguousarray(c.real),
        np.ascontiguousarray(c.imag),
        np.ascontiguousarray(points, dtype=float),
        np.pi / grid.L,
        deriv,
    )
    return (vals, dvals) if deriv else vals
