"""Kernel backend selection.

The compiled extension is used when it is importable; otherwise the pure
NumPy implementation takes over. ``DOCKMPC_BACKEND=pure|compiled`` forces
the choice (``compiled`` raises if the extension is missing rather than
silently falling back).
"""

import os

from . import pure

_requested = os.environ.get("DOCKMPC_BACKEND", "").strip().lower()

if _requested == "pure":
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from . import _fastcore as _impl

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        _impl = pure
        BACKEND = "pure"


def available_backends():
    """Names of importable backends, compiled first when present."""
    names = []
    try:
        from . import _fastcore  # noqa: F401

        names.append("compiled")
    except ImportError:
        pass
    names.append("pure")
    return names


def get_backend(name):
    """Return a backend module by name ('compiled' or 'pure')."""
    if name == "pure":
        return pure
    if name == "compiled":
        from . import _fastcore

        return _fastcore
    raise ValueError(f"unknown backend {name!r}")


EULER = _impl.EULER
RK4 = _impl.RK4
deriv = _impl.deriv
deriv_jacobians = _impl.deriv_jacobians
step = _impl.step
rollout = _impl.rollout
cost = _impl.cost
cost_and_gradient = _impl.cost_and_gradient
