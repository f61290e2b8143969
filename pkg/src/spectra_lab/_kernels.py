"""Backend selection for the hot kernels.

The compiled ``_core`` extension is used when it imports and the
environment variable ``SPECTRA_LAB_PURE`` is unset or ``0``; otherwise the
pure-Python ``_purepy`` module is used.  Both expose the same functions.
"""

import os

from . import _purepy

_core = None
if os.environ.get("SPECTRA_LAB_PURE", "0") in ("", "0"):
    try:
        from . import _core
    except ImportError:  # extension not built
        _core = None

BACKEND = "compiled" if _core is not None else "pure"
_impl = _core if _core is not None else _purepy


def get_backend(name: str):
    """Return the kernel module ``'compiled'`` or ``'pure'``."""
    if name == "pure":
        return _purepy
    if name == "compiled":
        from . import _core as core  # raises ImportError when not built

        return core
    raise ValueError(f"unknown backend {name!r}")


def compiled_available() -> bool:
    try:
        get_backend("compiled")
    except ImportError:
        return False
    return True


nomadic_csr = _impl.nomadic_csr
ball_excess = _impl.ball_excess
witness_rows = _impl.witness_rows
gray_code_max = _impl.gray_code_max
