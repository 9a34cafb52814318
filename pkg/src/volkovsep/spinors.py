"""Gamma matrices, free and Volkov bispinors, energy projectors, charge conjugation.

Conventions: natural units (hbar = c = 1), metric diag(+1, -1, -1, -1),
Dirac (standard) representation. A bispinor is a length-4 complex numpy
array; nothing here mutates its inputs.
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ValidationError

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])
ON_SHELL_RTOL = 1e-12

_I2 = np.eye(2, dtype=complex)
_Z2 = np.zeros((2, 2), dtype=complex)
PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class FourMomentum:
    """Contravariant four-momentum ``(E, px, py, pz)`` in units of m*c."""

    E: float
    px: float
    py: float
    pz: float
    on_shell: bool = True

    @classmethod
    def electron(cls, px=0.0, py=0.0, pz=0.0, m=1.0):
        """On-shell momentum with positive energy ``sqrt(m^2 + p^2)``."""
        if not m > 0:
            raise ValidationError(f"mass must be positive, got {m}")
        energy = float(np.sqrt(m * m + px * px + py * py + pz * pz))
        return cls(energy, float(px), float(py), float(pz), True)

    @classmethod
    def off_shell(cls, E, px, py, pz):
        return cls(float(E), float(px), float(py), float(pz), False)

    @property
    def spatial(self):
        return np.array([self.px, self.py, self.pz])

    def as_array(self):
        return np.array([self.E, self.px, self.py, self.pz])

    def minkowski_square(self):
        return self.E**2 - self.px**2 - self.py**2 - self.pz**2

    def dot(self, x):
        """``p.x = E t - p.r`` for a spacetime point ``x = (t, x, y, z)``."""
        t, xx, yy, zz = x
        return self.E * t - self.px * xx - self.py * yy - self.pz * zz

    def is_on_shell(self, m=1.0, rtol=ON_SHELL_RTOL):
        target = np.sqrt(m * m + self.px**2 + self.py**2 + self.pz**2)
        return self.E > 0 and abs(self.E - target) <= rtol * target


def require_on_shell(p, m):
    if not m > 0:
        raise ValidationError(f"mass must be positive, got {m}")
    if not isinstance(p, FourMomentum):
        raise ValidationError("expected a FourMomentum")
    if not p.is_on_shell(m):
        target = np.sqrt(m * m + p.px**2 + p.py**2 + p.pz**2)
        raise ValidationError(
            f"momentum is off-shell: E={float(p.E)!r} but sqrt(m^2+p^2)={float(target)!r} "
            f"(invariant E = +sqrt(m^2+p^2) violated)"
        )


@dataclass(frozen=True)
class GammaSet:
    """Dirac matrices ``gamma[mu]`` plus the derived ``alpha_i`` and ``beta``."""

    gamma: np.ndarray = field(repr=False)

    @property
    def beta(self):
        return self.gamma[0]

    @property
    def alpha(self):
        return np.array([self.gamma[0] @ self.gamma[i] for i in (1, 2, 3)])

    def slash(self, p):
        """``gamma^mu p_mu`` for a contravariant four-vector."""
        p = np.asarray(p.as_array() if isinstance(p, FourMomentum) else p)
        return p[0] * self.gamma[0] - p[1] * self.gamma[1] - p[2] * self.gamma[2] - p[3] * self.gamma[3]


@lru_cache(maxsize=None)
def make_gamma_set():
    gammas = np.empty((4, 4, 4), dtype=complex)
    gammas[0] = np.block([[_I2, _Z2], [_Z2, -_I2]])
    for i, s in enumerate(PAULI, start=1):
        gammas[i] = np.block([[_Z2, s], [-s, _Z2]])
    gammas.setflags(write=False)
    return GammaSet(gammas)


def hamiltonian(k, m=1.0):
    """Free Dirac Hamiltonian ``alpha.k + beta m`` as a 4x4 matrix."""
    g = make_gamma_set()
    alpha = g.alpha
    return k[0] * alpha[0] + k[1] * alpha[1] + k[2] * alpha[2] + m * g.beta


def free_spinors(p, s, m=1.0):
    """Free spinors ``u(p, s)`` and ``v(p, s)`` normalised to ``u^+u = v^+v = 2E/m``.

    ``s = +1`` is spin up along z for ``u``. ``v`` is defined as the charge
    conjugate ``i gamma^2 u*``, so ``v(p, s)`` carries physical spin ``s``.
    """
    require_on_shell(p, m)
    if s not in (1, -1):
        raise ValidationError(f"spin label must be +1 or -1, got {s!r}")
    chi = np.array([1.0, 0.0], dtype=complex) if s == 1 else np.array([0.0, 1.0], dtype=complex)
    sigma_p = p.px * PAULI[0] + p.py * PAULI[1] + p.pz * PAULI[2]
    norm = np.sqrt((p.E + m) / m)
    u = norm * np.concatenate([chi, sigma_p @ chi / (p.E + m)])
    return u, charge_conjugate(u)


def volkov_spinors(p, m=1.0):
    """The two column vectors multiplying the Volkov phase, unnormalised."""
    if not m > 0:
        raise ValidationError(f"mass must be positive, got {m}")
    require_on_shell(p, m)
    E, px, py, pz = p.E, p.px, p.py, p.pz
    pt = px + 1j * py
    u1 = np.array([E + m, 0.0, pz, pt], dtype=complex) / (E + m)
    u2 = np.array([pt, -(E + m - pz), pt, E + m - pz], dtype=complex) / (2.0 * (E + m) * (E - pz))
    return u1, u2


def charge_conjugate(psi):
    """``i gamma^2 psi*``; acts on the leading spinor axis of any array."""
    psi = np.asarray(psi)
    g2 = make_gamma_set().gamma[2]
    return np.tensordot(1j * g2, np.conj(psi), axes=(1, 0))


def energy_projectors(k, m=1.0):
    """Return ``(Lambda_plus, Lambda_minus) = (E_k +- H(k)) / (2 E_k)``."""
    if not m > 0:
        raise ValidationError(f"mass must be positive, got {m}")
    k = np.asarray(k, dtype=float)
    energy = np.sqrt(m * m + k @ k)
    h = hamiltonian(k, m)
    ident = np.eye(4)
    return (energy * ident + h) / (2 * energy), (energy * ident - h) / (2 * energy)
