"""Kernel backend selection.

The compiled extension is used when it imported cleanly; the pure-Python
kernels are the fallback and the reference semantics.  Set
FOPKIT_BACKEND=pure or FOPKIT_BACKEND=native to force a choice (forcing
native raises if the extension is unavailable).
"""

from __future__ import annotations

import os

from . import pure

_choice = os.environ.get("FOPKIT_BACKEND", "").strip().lower()

if _choice == "pure":
    active = pure
elif _choice == "native":
    from . import _native as active  # type: ignore[no-redef]
else:
    try:
        from . import _native as active  # type: ignore[no-redef]
    except ImportError:
        active = pure

BACKEND_NAME: str = active.NAME


def available_backends():
    out = {"pure": pure}
    try:
        from . import _native

        out["native"] = _native
    except ImportError:
        pass
    return out
