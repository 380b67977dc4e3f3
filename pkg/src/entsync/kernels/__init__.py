"""Hot-loop kernels with a compiled fast path and a numpy fallback.

The compiled extension is optional: if it was not built (or the
``ENTSYNC_FORCE_FALLBACK`` environment variable is set), the pure-numpy
implementation is used instead. Both backends consume identical pre-drawn
random variate arrays and produce bit-identical outputs, so simulation
results never depend on which backend is active.
"""

import os

from . import fallback

if os.environ.get("ENTSYNC_FORCE_FALLBACK"):
    _impl = fallback
    BACKEND = "fallback"
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        _impl = fallback
        BACKEND = "fallback"

score_shifts = _impl.score_shifts
decode_user_slots = _impl.decode_user_slots

__all__ = ["BACKEND", "score_shifts", "decode_user_slots", "fallback"]
