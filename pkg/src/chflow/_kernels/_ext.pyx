# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled off-grid evaluation of real trigonometric interpolants.

One pass per point using the complex-exponential recurrence
exp(i(k+1)t) = exp(ikt)*exp(it), accumulating the value and (optionally)
the spatial derivative together.  No per-mode sin/cos calls and no
points-by-modes scratch matrix.
"""

from libc.math cimport cos, sin

import numpy as np


def trig_eval(const double[::1] re, const double[::1] im,
              const double[::1] pts, double xi1, bint want_deriv):
    """Mirror of chflow._kernels._fallback.trig_eval (see its docstring)."""
    cdef Py_ssize_t npts = pts.shape[0]
    cdef Py_ssize_t knyq = re.shape[0] - 1
    vals = np.empty(npts, dtype=np.float64)
    derivs = np.empty(npts, dtype=np.float64) if want_deriv else None
    cdef double[::1] vout = vals
    cdef double[::1] dout
    if want_deriv:
        dout = derivs

    cdef Py_ssize_t i, k
    cdef double theta, c1, s1, ck, sk, tmp, acc, dacc
    for i in range(npts):
        theta = xi1 * pts[i]
        c1 = cos(theta)
        s1 = sin(theta)
        ck = 1.0
        sk = 0.0
        acc = re[0]
        dacc = 0.0
        for k in range(1, knyq):
            tmp = ck * c1 - sk * s1
            sk = sk * c1 + ck * s1
            ck = tmp
            acc += 2.0 * (re[k] * ck - im[k] * sk)
            if want_deriv:
                dacc -= 2.0 * xi1 * k * (re[k] * sk + im[k] * ck)
        # Nyquist mode carries only a cosine component for real fields.
        tmp = ck * c1 - sk * s1
        sk = sk * c1 + ck * s1
        ck = tmp
        acc += re[knyq] * ck
        if want_deriv:
            dacc -= xi1 * knyq * re[knyq] * sk
        vout[i] = acc
        if want_deriv:
            dout[i] = dacc
    return vals, derivs
