"""Discrete Littlewood-Paley decomposition and Besov/Sobolev norms.

Blocks are frequency annuli |xi| ~ 2^k.  Two partitions are provided:

* ``sharp``  -- indicator cutoffs, block k covers 2^k <= |xi| < 2^{k+1}
  (block -1 is the low-pass |xi| < 1).  Exact block supports, default.
* ``smooth`` -- raised-cosine low-pass chi with a one-octave transition;
  block k = chi(xi/2^{k+1}) - chi(xi/2^k) is supported in 2^k < |xi| < 2^{k+2}.

Both telescope, so the blocks reconstruct the input exactly on the grid.
The Besov norm is the weighted block-norm sum

    ( sum_{k >= -1} 2^{k s q} ||block_k f||_{L^p}^q )^{1/q},

with the sup over k when q is infinite.  For p = q = 2 this is equivalent
(up to partition constants) to the Sobolev multiplier norm computed by
:func:`sobolev_norm`.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spectral import Grid, RealField


@dataclass(frozen=True)
class BesovIndex:
    """Regularity s, integrability p, summability q (p, q in [1, inf])."""

    s: float
    p: float = 2.0
    q: float = 2.0

    def __post_init__(self):
        if not np.isfinite(self.s):
            raise ValueError("regularity index must be finite")
        if self.p < 1 or self.q < 1:
            raise ValueError("p and q must be >= 1 (inf allowed)")


@dataclass(frozen=True)
class DyadicDecomposition:
    blocks: tuple          # RealField per block, k = -1 .. k_max
    k_values: tuple        # matching block indices
    style: str


def k_max(grid: Grid) -> int:
    return max(0, math.ceil(math.log2(grid.xi_max)))


def _smooth_lowpass(t):
    """chi(|xi|/c): 1 inside, cos^2 ramp over one octave, 0 beyond."""
    t = np.abs(t)
    out = np.zeros_like(t)
    out[t <= 1.0] = 1.0
    ramp = (t > 1.0) & (t < 2.0)
    out[ramp] = np.cos(0.5 * np.pi * np.log2(t[ramp])) ** 2
    return out


@lru_cache(maxsize=32)
def _block_multipliers(grid: Grid, style: str):
    """Per-block Fourier multipliers, cached per (grid, style)."""
    axi = np.abs(grid.xi)
    km = k_max(grid)
    mults = []
    if style == "sharp":
        mults.append((axi < 1.0).astype(float))
        for k in range(km + 1):
            mults.append(((axi >= 2.0**k) & (axi < 2.0 ** (k + 1))).astype(float))
    elif style == "smooth":
        prev = _smooth_lowpass(axi)          # S_0
        mults.append(prev)
        for k in range(km + 1):
            nxt = _smooth_lowpass(axi / 2.0 ** (k + 1))
            mults.append(nxt - prev)
            prev = nxt
    else:
        raise ValueError(f"unknown cutoff style {style!r}")
    return tuple(mults)


def lp_decompose(f: RealField, style: str = "sharp") -> DyadicDecomposition:
    """Split f into dyadic frequency blocks; blocks sum back to f."""
    grid = f.grid
    mults = _block_multipliers(grid, style)
    blocks = tuple(
        RealField(grid, grid.apply_multiplier(f.samples, m)) for m in mults
    )
    return DyadicDecomposition(blocks, tuple(range(-1, len(mults) - 1)), style)


def lowpass(f: RealField, j: int, style: str = "sharp") -> RealField:
    """Cumulative low-pass S_j f = sum of blocks k < j."""
    grid = f.grid
    if style == "sharp":
        mult = (np.abs(grid.xi) < 2.0**j).astype(float)
    else:
        mult = _smooth_lowpass(grid.xi / 2.0**j)
    return RealField(grid, grid.apply_multiplier(f.samples, mult))


def lp_norm(f: RealField, p: float) -> float:
    """L^p norm by grid quadrature; max of |f| for p = inf."""
    a = np.abs(f.samples)
    if np.isinf(p):
        return float(a.max(initial=0.0))
    return float((f.grid.dx * np.sum(a**p)) ** (1.0 / p))


def besov_norm(f: RealField, idx: BesovIndex, style: str = "sharp") -> float:
    dec = lp_decompose(f, style)
    terms = np.array(
        [2.0 ** (k * idx.s) * lp_norm(b, idx.p) for k, b in zip(dec.k_values, dec.blocks)]
    )
    if np.isinf(idx.q):
        return float(terms.max(initial=0.0))
    return float(np.sum(terms**idx.q) ** (1.0 / idx.q))


def sobolev_norm(f: RealField, s: float) -> float:
    """Multiplier norm sqrt(2L * sum (1 + xi^2)^s |c_k|^2)."""
    grid = f.grid
    c = grid.to_coeffs(f.samples)
    weights = np.exp(s * np.log1p(grid.xi**2))
    return float(np.sqrt(2.0 * grid.L * np.sum(weights * np.abs(c) ** 2)))
