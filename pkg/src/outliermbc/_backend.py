"""Kernel selection: the compiled extension if importable, else numpy fallbacks.

Set ``OUTLIERMBC_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

pure = _pykernels
compiled = None

if os.environ.get("OUTLIERMBC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled
    except ImportError:  # extension not built
        compiled = None

kernels = compiled if compiled is not None else pure
NAME = "compiled" if compiled is not None else "pure"
