"""Pure-numpy implementation of the off-grid evaluation kernel.

Builds the full points-by-modes phase matrix, so it allocates
O(len(pts) * n/2) scratch per call.  Used when the compiled extension is
unavailable or disabled via CHFLOW_PURE_PYTHON=1.
"""

import numpy as np


def trig_eval(re, im, pts, xi1, want_deriv):
    """Evaluate sum_k c_k exp(i*k*xi1*x) (real field, half spectrum) at pts.

    re, im: real and imaginary parts of coefficients k = 0..n/2 in the
    exp(i*xi*x) basis (Nyquist entry is the cosine amplitude).
    Returns (values, derivatives_or_None).
    """
    re = np.asarray(re, dtype=float)
    im = np.asarray(im, dtype=float)
    pts = np.asarray(pts, dtype=float)
    k = np.arange(re.size)
    weight = np.full(re.size, 2.0)
    weight[0] = 1.0
    weight[-1] = 1.0
    theta = np.outer(pts, xi1 * k)
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    vals = cos_t @ (weight * re) - sin_t @ (weight * im)
    if not want_deriv:
        return vals, None
    xk = xi1 * k
    derivs = -(sin_t @ (weight * re * xk) + cos_t @ (weight * im * xk))
    return vals, derivs
