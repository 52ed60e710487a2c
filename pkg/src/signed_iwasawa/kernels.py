"""Backend selection for the hot kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise (or
when ``SIGNED_IWASAWA_PURE_PYTHON=1``) the numpy versions in ``_pykernels``.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
howell_eliminate = _pykernels.howell_eliminate
count_points_odd = _pykernels.count_points_odd

if os.environ.get("SIGNED_IWASAWA_PURE_PYTHON") != "1":
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "cython"
        howell_eliminate = _ckernels.howell_eliminate
        count_points_odd = _ckernels.count_points_odd


def available_backends() -> dict:
    """Map backend name to a namespace exposing both kernels."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        found["cython"] = _ckernels
    return found
