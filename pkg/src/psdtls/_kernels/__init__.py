"""Dense kernel backend selection.

The compiled extension is preferred when importable; the pure-Python twin
is the fallback.  Set PSDTLS_PURE_PYTHON=1 to force the fallback, e.g. to
compare the two implementations.  ``BACKEND`` reports which one is active
("compiled" or "python").
"""

import os

if os.environ.get("PSDTLS_PURE_PYTHON"):
    from . import _py_impl as _impl
else:
    try:
        from . import _cy_impl as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _py_impl as _impl

BACKEND = _impl.BACKEND
sym_eigh = _impl.sym_eigh
compact_qr = _impl.compact_qr
lu_solve = _impl.lu_solve

__all__ = ["BACKEND", "sym_eigh", "compact_qr", "lu_solve"]
