"""Kernel selection: the compiled extension when importable, numpy otherwise.

Set ``DIRICHLET_XRAY_PURE=1`` to force the numpy path.
"""

import os

from . import _hurwitz_py

try:
    if os.environ.get("DIRICHLET_XRAY_PURE"):
        raise ImportError("pure-python kernels requested")
    from . import _hurwitz as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "numpy"
hurwitz_em = _compiled.hurwitz_em if _compiled is not None else _hurwitz_py.hurwitz_em
hurwitz_em_d = _compiled.hurwitz_em_d if _compiled is not None else _hurwitz_py.hurwitz_em_d
hurwitz_em_numpy = _hurwitz_py.hurwitz_em
hurwitz_em_d_numpy = _hurwitz_py.hurwitz_em_d
hurwitz_em_compiled = _compiled.hurwitz_em if _compiled is not None else None
hurwitz_em_d_compiled = _compiled.hurwitz_em_d if _compiled is not None else None
