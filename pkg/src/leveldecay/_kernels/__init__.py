"""Backend selection for the hot kernels.

The compiled extension is preferred when importable; the numpy fallback is
selected otherwise, or when LEVELDECAY_PURE is set in the environment.  Both
backends expose the same three functions:

    extremal_scan_geom(lk, G, row_add, col_add, alpha, beta, lphi0) -> lphi
    extremal_scan_generic(levels, alpha, beta, lnc, thak, thah, lphi0) -> lphi
    extremal_scan_continue(levels, lk, lphi, A, alpha, beta, lnc, thak, thah,
                           start) -> None (extends lphi/A in place)
    stencil_apply(ax, ay, az, x, out, inv_h2) -> None (writes out)
"""

import os

from . import pure

if os.environ.get("LEVELDECAY_PURE"):
    backend = pure
else:
    try:
        from . import _core as backend
    except ImportError:
        backend = pure

BACKEND_NAME = backend.NAME

extremal_scan_geom = backend.extremal_scan_geom
extremal_scan_generic = backend.extremal_scan_generic
extremal_scan_continue = backend.extremal_scan_continue
stencil_apply = backend.stencil_apply
