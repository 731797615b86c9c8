"""Backend selection for the hot kernels.

The compiled extension is used when it imports; set ``GHOSTLAB_PURE=1`` to
force the numpy fallback.  ``BACKEND`` names the active one and
``BACKENDS`` holds every importable implementation.
"""

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["cython"] = _compiled

if _compiled is None or os.environ.get("GHOSTLAB_PURE", "") not in ("", "0"):
    BACKEND = "python"
else:
    BACKEND = "cython"

_active = BACKENDS[BACKEND]
closure = _active.closure
RowIndex = _active.RowIndex
bfs_distances = _active.bfs_distances
