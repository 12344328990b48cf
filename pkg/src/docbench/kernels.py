"""Kernel selection: compiled extension when importable, pure Python otherwise.

Set ``DOCBENCH_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

if os.environ.get("DOCBENCH_PURE_PYTHON", "").lower() in ("1", "true", "yes"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

COMPILED = _impl is not _pykernels
scan = _impl.scan
ngram_stats = _impl.ngram_stats
