"""Backend selection for the hot numerical kernels.

The compiled extension is used when it imports; ``IFRA_PURE_PYTHON=1`` forces
the pure-Python twin.
"""
import os

from ifra import _smo_py

if os.environ.get("IFRA_PURE_PYTHON", "") not in ("", "0"):
    smo_solve = _smo_py.smo_solve
    BACKEND = "python"
else:
    try:
        from ifra._smo import smo_solve
        BACKEND = "compiled"
    except ImportError:
        smo_solve = _smo_py.smo_solve
        BACKEND = "python"

__all__ = ["smo_solve", "BACKEND"]
