"""Field-kernel backend selection.

The compiled extension is preferred when importable; set ROTSIM_BACKEND to
"python" or "cython" to force a choice (forcing "cython" without the
extension built raises at import).
"""

from __future__ import annotations

import os

from . import kernels_py

_requested = os.environ.get("ROTSIM_BACKEND", "").strip().lower()

if _requested == "python":
    _kernel_module = kernels_py
elif _requested == "cython":
    from . import _kernels as _kernel_module  # noqa: F401
else:
    try:
        from . import _kernels as _kernel_module  # type: ignore[no-redef]
    except ImportError:
        _kernel_module = kernels_py

step_fields = _kernel_module.step_fields
BACKEND_NAME: str = _kernel_module.BACKEND_NAME


def available_backends() -> list[str]:
    names = ["python"]
    try:
        from . import _kernels  # noqa: F401
        names.append("cython")
    except ImportError:
        pass
    return names
