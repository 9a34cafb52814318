"""Hot per-node kernels, compiled when available.

The compiled extension ``_ckernels`` is used if it imports; otherwise the
numpy implementations in ``_pykernels`` are used. Setting the environment
variable ``VOLKOVSEP_PURE_PYTHON=1`` forces the fallback.
"""
import os

import numpy as np

from . import _pykernels

_native = None
if os.environ.get("VOLKOVSEP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _native
    except ImportError:  # extension not built
        _native = None

BACKEND = "cython" if _native is not None else "python"


def available_backends():
    names = ["python"]
    if _native is not None:
        names.append("cython")
    else:
        try:
            from . import _ckernels  # noqa: F401
            names.append("cython")
        except ImportError:
            pass
    return names


def get_backend(name=None):
    """Return the kernel module for ``name`` (``"python"``/``"cython"``) or the active one."""
    if name is None:
        name = BACKEND
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def _prep(values, kx, ky, kz):
    values = np.ascontiguousarray(values, dtype=np.complex128)
    n = values.shape[1]
    kx = np.ascontiguousarray(np.broadcast_to(kx, (n,)), dtype=np.float64)
    ky = np.ascontiguousarray(np.broadcast_to(ky, (n,)), dtype=np.float64)
    kz = np.ascontiguousarray(np.broadcast_to(kz, (n,)), dtype=np.float64)
    return values, kx, ky, kz


def apply_hamiltonian(values, kx, ky, kz, m, backend=None):
    mod = get_backend(backend)
    values, kx, ky, kz = _prep(values, kx, ky, kz)
    return mod.apply_hamiltonian(values, kx, ky, kz, float(m))


def project(values, kx, ky, kz, m, sign, backend=None):
    """Apply the energy projector ``(1 + sign*H(k)/E_k)/2`` node by node."""
    mod = get_backend(backend)
    values, kx, ky, kz = _prep(values, kx, ky, kz)
    return mod.project(values, kx, ky, kz, float(m), int(sign))


def free_evolve(values, kx, ky, kz, m, dt, backend=None):
    """Apply ``exp(-i H(k) dt)`` node by node."""
    mod = get_backend(backend)
    values, kx, ky, kz = _prep(values, kx, ky, kz)
    return mod.free_evolve(values, kx, ky, kz, float(m), float(dt))


def theta_accumulate(g, weights, forward, backend=None):
    mod = get_backend(backend)
    g = np.ascontiguousarray(g, dtype=np.complex128)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    return mod.theta_accumulate(g, weights, bool(forward))
