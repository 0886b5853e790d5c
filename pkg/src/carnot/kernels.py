"""Distance-kernel backend selection.

The compiled extension is preferred when it imports; set CARNOT_PURE_PYTHON=1
to force the numpy fallback.  Both backends implement the same
cc_distance_batch(h, v) contract and agree to machine precision.
"""

from __future__ import annotations

import os

from . import _ccdist_py

if os.environ.get("CARNOT_PURE_PYTHON"):
    _impl = _ccdist_py
else:
    try:
        from . import _ccdist as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _ccdist_py

cc_distance_batch = _impl.cc_distance_batch
eps_factor = _ccdist_py.eps_factor
vertical_ratio = _ccdist_py.vertical_ratio
solve_mu = _ccdist_py.solve_mu


def backend_name() -> str:
    return "compiled" if _impl.__name__.endswith("_ccdist") else "numpy"


def available_backends():
    backends = {"numpy": _ccdist_py}
    try:
        from . import _ccdist  # type: ignore[attr-defined]

        backends["compiled"] = _ccdist
    except ImportError:
        pass
    return backends
