"""Kernel backend chosen at import time.

The compiled ``_ckernels`` extension is preferred.  Set
``FASTIBL_PURE_PYTHON=1`` to force the numpy fallback, or pass a backend
module explicitly to the memory classes.
"""

import os

from . import _pykernels

python = _pykernels
try:
    from . import _ckernels as compiled
except ImportError:  # extension not built
    compiled = None

if compiled is not None and not os.environ.get("FASTIBL_PURE_PYTHON"):
    default = compiled
else:
    default = python

BACKEND = default.BACKEND


def resolve(backend=None):
    if backend is None:
        return default
    if isinstance(backend, str):
        if backend == "python":
            return python
        if backend == "compiled":
            if compiled is None:
                raise ImportError("compiled kernels are not built; run `pip install -e .`")
            return compiled
        raise ValueError(f"unknown kernel backend {backend!r}")
    return backend
