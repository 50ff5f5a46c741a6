"""Backend selection for the hot propagation kernel.

The compiled Cython extension is preferred; the pure numpy/scipy twin is
used when the extension is unavailable or when OPENWG_PURE=1 is set.
``BACKEND`` records which one was picked.
"""
import os

if os.environ.get("OPENWG_PURE", "0") == "1":
    from ._bpmcore_py import run_steps
    BACKEND = "pure"
else:
    try:
        from ._bpmcore import run_steps  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on build environment
        from ._bpmcore_py import run_steps  # type: ignore[no-redef]
        BACKEND = "pure"

__all__ = ["run_steps", "BACKEND"]
