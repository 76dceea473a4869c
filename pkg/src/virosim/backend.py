"""Stepping-kernel backend selection.

The compiled extension is preferred when importable; otherwise the
pure-Python twin is used. Set VIROSIM_BACKEND=python or VIROSIM_BACKEND=
compiled to force one side (forcing the compiled backend raises if the
extension is missing rather than silently falling back).
"""
from __future__ import annotations

import os

_requested = os.environ.get("VIROSIM_BACKEND", "")

if _requested not in ("", "compiled", "python"):
    raise ImportError(
        f"VIROSIM_BACKEND must be 'compiled' or 'python', got {_requested!r}"
    )

if _requested == "python":
    from . import _kernel_py as kernel

    BACKEND_NAME = "python"
elif _requested == "compiled":
    from . import _kernel_c as kernel  # type: ignore[no-redef]

    BACKEND_NAME = "compiled"
else:
    try:
        from . import _kernel_c as kernel  # type: ignore[no-redef]

        BACKEND_NAME = "compiled"
    except ImportError:
        from . import _kernel_py as kernel

        BACKEND_NAME = "python"
