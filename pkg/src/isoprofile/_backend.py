"""Kernel backend selection.

The compiled extension ``_kernels`` is used when it imports; otherwise the
pure-Python ``_kernels_py`` is used. ``ISOPROFILE_BACKEND=python`` forces the
fallback, ``ISOPROFILE_BACKEND=compiled`` makes a missing extension an error.
Callers look up :data:`kernels` at call time, so :func:`set_backend` takes
effect immediately.
"""
import importlib
import os

from . import _kernels_py

BACKENDS = ("compiled", "python")


def _load(name):
    if name == "python":
        return _kernels_py
    if name == "compiled":
        return importlib.import_module("isoprofile._kernels")
    raise ValueError(f"unknown backend {name!r}; expected one of {BACKENDS}")


def available():
    """Names of the backends that can be loaded in this environment."""
    names = []
    for name in BACKENDS:
        try:
            _load(name)
        except ImportError:
            continue
        names.append(name)
    return names


def set_backend(name):
    """Switch the active kernel module and return its name."""
    global kernels, name_active
    kernels = _load(name)
    name_active = name
    return name


def _initial():
    requested = os.environ.get("ISOPROFILE_BACKEND", "auto").strip().lower()
    if requested in ("", "auto"):
        try:
            return "compiled", _load("compiled")
        except ImportError:
            return "python", _kernels_py
    return requested, _load(requested)


name_active, kernels = _initial()
