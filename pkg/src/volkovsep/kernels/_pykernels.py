"""Pure-numpy implementations of the per-node spinor kernels.

Every function works on a flattened node axis: ``values`` has shape
``(4, n)`` and ``kx, ky, kz`` have shape ``(n,)``.
"""
import numpy as np


def apply_hamiltonian(values, kx, ky, kz, m):
    """Return ``H(k) f`` with ``H = alpha.k + beta m`` in the Dirac representation."""
    a0, a1, b0, b1 = values
    kminus = kx - 1j * ky
    kplus = kx + 1j * ky
    out = np.empty_like(values)
    out[0] = m * a0 + kz * b0 + kminus * b1
    out[1] = m * a1 + kplus * b0 - kz * b1
    out[2] = kz * a0 + kminus * a1 - m * b0
    out[3] = kplus * a0 - kz * a1 - m * b1
    return out


def project(values, kx, ky, kz, m, sign):
    energy = np.sqrt(m * m + kx * kx + ky * ky + kz * kz)
    hf = apply_hamiltonian(values, kx, ky, kz, m)
    return 0.5 * (values + sign * hf / energy)


def free_evolve(values, kx, ky, kz, m, dt):
    energy = np.sqrt(m * m + kx * kx + ky * ky + kz * kz)
    hf = apply_hamiltonian(values, kx, ky, kz, m) / energy
    plus = 0.5 * (values + hf)
    minus = 0.5 * (values - hf)
    return np.exp(-1j * energy * dt) * plus + np.exp(1j * energy * dt) * minus


def theta_accumulate(g, weights, forward):
    """Trapezoid-weighted running sum with the coincident slice at half weight.

    forward:  out[i] = sum_{j<i} w_j g_j + w_i g_i / 2
    backward: out[i] = sum_{j>i} w_j g_j + w_i g_i / 2
    """
    wg = g * weights[:, None, None]
    if forward:
        total = np.cumsum(wg, axis=0)
    else:
        total = np.cumsum(wg[::-1], axis=0)[::-1]
    return total - 0.5 * wg
