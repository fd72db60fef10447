"""Backend selection for the off-grid evaluation kernel.

The compiled Cython kernel is preferred; the numpy fallback is used when
the extension is missing or CHFLOW_PURE_PYTHON=1 is set.  Both expose the
same ``trig_eval`` signature; ``BACKEND`` records which one is active.
"""

import os

from . import _fallback

if os.environ.get("CHFLOW_PURE_PYTHON") == "1":
    trig_eval = _fallback.trig_eval
    BACKEND = "fallback"
else:
    try:
        from ._ext import trig_eval

        BACKEND = "compiled"
    except ImportError:
        trig_eval = _fallback.trig_eval
        BACKEND = "fallback"

__all__ = ["trig_eval", "BACKEND"]
