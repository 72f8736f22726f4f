"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the
pure-Python kernels are used.  Set ``QSDC3_BACKEND=python`` (or
``compiled``) to force a choice, or call :func:`set_backend` at runtime
(used by the backend-parity tests and the benchmark script).
"""

import os

from . import _corepy

_KERNEL_NAMES = (
    "norm_sq",
    "apply_1q",
    "prob_zero",
    "collapse",
    "bell_probs",
    "attach_ancilla",
    "discard_qubit",
)

name = "python"


def _load(which):
    if which == "python":
        return _corepy
    if which == "compiled":
        from . import _core_cy

        return _core_cy
    raise ValueError("unknown backend %r (expected 'python' or 'compiled')" % (which,))


def set_backend(which):
    """Swap the active kernel implementation."""
    global name
    impl = _load(which)
    name = which
    g = globals()
    for kernel in _KERNEL_NAMES:
        g[kernel] = getattr(impl, kernel)


def active_backend():
    return name


_forced = os.environ.get("QSDC3_BACKEND", "").strip().lower()
if _forced:
    set_backend(_forced)
else:
    try:
        set_backend("compiled")
    except ImportError:
        set_backend("python")
