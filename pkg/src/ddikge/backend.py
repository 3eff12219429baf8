"""Kernel backend selection.

The compiled extension (_ckern) is preferred; the pure-Python module
(_pykern) is a drop-in fallback producing bit-identical results. Set
DDIKGE_BACKEND=python or DDIKGE_BACKEND=compiled to force one; the
default "auto" takes the compiled backend when it importable.
"""

from __future__ import annotations

import os

from . import _pykern


def _select():
    choice = os.environ.get("DDIKGE_BACKEND", "auto")
    if choice not in ("auto", "compiled", "python"):
        raise RuntimeError(
            f"DDIKGE_BACKEND must be auto, compiled, or python, got {choice!r}"
        )
    if choice == "python":
        return _pykern
    try:
        from . import _ckern
        return _ckern
    except ImportError:
        if choice == "compiled":
            raise
        return _pykern


kern = _select()
BACKEND = kern.BACKEND_NAME


def available_backends() -> dict:
    """Map of backend name -> kernel module, for tests and benchmarks."""
    out = {"python": _pykern}
    try:
        from . import _ckern
        out["compiled"] = _ckern
    except ImportError:
        pass
    return out
