"""Hot-kernel backend selection.

The compiled extension ``_ckernels`` is used when it was built; otherwise
the numpy versions in ``_pykernels`` are used.  Setting the environment
variable ``ONEBIT_BNB_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pykernels
from ._pykernels import (  # noqa: F401
    AT_LOWER,
    AT_UPPER,
    BASIC,
    BUDGET,
    FIXED,
    FREE,
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
)

python_backend = _pykernels
compiled_backend = None

if not os.environ.get("ONEBIT_BNB_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "compiled" if compiled_backend is not None else "python"

simplex_loop = backend.simplex_loop
best_sign_pattern = backend.best_sign_pattern
