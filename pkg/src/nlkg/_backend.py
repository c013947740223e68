"""Pick the kernel implementation at import time.

The compiled extension is used when it was built; set ``NLKG_PURE_PYTHON=1``
to force the numpy fallback.
"""

import os

from . import _kernels_py

kernels = _kernels_py
BACKEND = "python"

if os.environ.get("NLKG_PURE_PYTHON", "").strip() not in ("1", "true", "yes"):
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        kernels = _ckernels
        BACKEND = "cython"

laplacian = kernels.laplacian
accelerations = kernels.accelerations
verlet_steps = kernels.verlet_steps
