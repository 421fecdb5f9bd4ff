"""Selects the compiled pair-sum kernels when available.

Set FRACVAR_PURE_PYTHON=1 to force the NumPy fallback.
"""

from __future__ import annotations

import os

if os.environ.get("FRACVAR_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as impl

    COMPILED = False
else:
    try:
        from . import _ckernels as impl  # type: ignore[attr-defined]

        COMPILED = True
    except ImportError:  # pragma: no cover - depends on the build
        from . import _pykernels as impl

        COMPILED = False

gagliardo_1d = impl.gagliardo_1d
gagliardo_2d = impl.gagliardo_2d
nl_sum_1d = impl.nl_sum_1d
nl_sum_2d = impl.nl_sum_2d
apply_at_1d = impl.apply_at_1d
apply_at_2d = impl.apply_at_2d
