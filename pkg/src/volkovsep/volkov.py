"""Pointwise Volkov wavefunction in a linearly polarised plane wave.

The wave is ``A_x = A cos(omega (t - z))`` and ``A`` already contains the
charge, so the Dirac equation being solved is
``(i gamma^mu d_mu - m) psi = coupling * gamma^mu A_mu psi`` with
``A_mu = (0, -A_x, 0, 0)`` and ``coupling = +1``.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ValidationError
from .spinors import FourMomentum, charge_conjugate, make_gamma_set, require_on_shell, volkov_spinors


@dataclass(frozen=True)
class Envelope:
    """Raised-cosine switching window: ramp up, plateau, ramp down."""

    t_on: float
    ramp: float
    plateau: float

    def __post_init__(self):
        if not (self.ramp > 0 and self.plateau >= 0):
            raise ValidationError("envelope needs ramp > 0 and plateau >= 0")

    @property
    def t_off(self):
        return self.t_on + 2 * self.ramp + self.plateau

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        s = t - self.t_on
        up = np.sin(0.5 * np.pi * s / self.ramp) ** 2
        down = np.cos(0.5 * np.pi * (s - self.ramp - self.plateau) / self.ramp) ** 2
        g = np.where(s < self.ramp, up, np.where(s <= self.ramp + self.plateau, 1.0, down))
        return np.where((s <= 0) | (t >= self.t_off), 0.0, g)


@dataclass(frozen=True)
class PlaneWaveFieldSpec:
    A: float
    omega: float
    envelope: Optional[Envelope] = None

    def __post_init__(self):
        if not np.isfinite(self.A) or self.A < 0:
            raise ValidationError(f"wave amplitude must satisfy A >= 0, got {self.A}")
        if not np.isfinite(self.omega) or self.omega <= 0:
            raise ValidationError(f"wave frequency must satisfy omega > 0, got {self.omega}")

    def potential_x(self, t, z):
        """Contravariant ``A^1(t, z)`` including the envelope when present."""
        a = self.A * np.cos(self.omega * (np.asarray(t) - np.asarray(z)))
        if self.envelope is not None:
            a = a * self.envelope(t)
        return a


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite([self.t, self.x, self.y, self.z])):
            raise ValidationError("spacetime point must be finite")

    def __iter__(self):
        return iter((self.t, self.x, self.y, self.z))


def _check(p, field, m):
    require_on_shell(p, m)
    if field.envelope is not None:
        raise ValidationError("the analytic Volkov solution holds only for the infinite wave; drop the envelope")


def ponderomotive_shift(p, field):
    """Coefficient of ``(t - z)`` in the non-periodic Volkov phase, ``A^2 / (4 (E - pz))``."""
    return field.A**2 / (4.0 * (p.E - p.pz))


def periodic_factor(p, field, phase, m=1.0):
    """The 2pi-periodic part of psi_W as a function of ``phase = omega (t - z)``.

    Shape ``(4,) + phase.shape``.
    """
    _check(p, field, m)
    u1, u2 = volkov_spinors(p, m)
    phase = np.asarray(phase, dtype=float)
    A, w, lc = field.A, field.omega, p.E - p.pz
    osc = np.exp(1j * (8 * A * p.px * np.sin(phase) - A * A * np.sin(2 * phase)) / (8 * w * lc))
    spinor = u1[(...,) + (None,) * phase.ndim] - A * np.cos(phase) * u2[(...,) + (None,) * phase.ndim]
    return osc * spinor


def volkov_eval(p, field, X, m=1.0):
    """Evaluate psi_W at ``X = (t, x, y, z)``; coordinates may be broadcastable arrays."""
    _check(p, field, m)
    t, x, y, z = (np.asarray(c, dtype=float) for c in X)
    t, x, y, z = np.broadcast_arrays(t, x, y, z)
    u1, u2 = volkov_spinors(p, m)
    A, w, lc = field.A, field.omega, p.E - p.pz
    phase = w * (t - z)
    plane = np.exp(-1j * (p.E * t - p.px * x - p.py * y - p.pz * z))
    drift = np.exp(-1j * A * A * (t - z) / (4 * lc))
    osc = np.exp(1j * (8 * A * p.px * np.sin(phase) - A * A * np.sin(2 * phase)) / (8 * w * lc))
    expand = (...,) + (None,) * t.ndim
    spinor = u1[expand] - A * np.cos(phase) * u2[expand]
    return plane * drift * osc * spinor


def positron_volkov_eval(p, field, X, m=1.0):
    """Charge-conjugate image of psi_W; solves the equation with ``A_mu -> -A_mu``."""
    return charge_conjugate(volkov_eval(p, field, X, m))


def gauge_potential_slash(field, t, z):
    """``gamma^mu A_mu`` at one point (4x4)."""
    ax = field.potential_x(t, z)
    return -make_gamma_set().gamma[1] * ax


def dirac_residual(p, field, X, m=1.0, h=1e-3, coupling=1.0, branch="electron"):
    """Norm of ``(i gamma.d - m) psi - coupling gamma.A psi`` at ``X`` by centred differences.

    ``branch="positron"`` checks the charge-conjugate solution, which solves
    the equation with the coupling sign reversed; pass the coupling of the
    original equation and the flip is applied here.
    """
    if not (np.isfinite(h) and h > 0):
        raise ValidationError(f"finite-difference step must be positive, got {h}")
    if branch == "electron":
        evaluate, c = volkov_eval, coupling
    elif branch == "positron":
        evaluate, c = positron_volkov_eval, -coupling
    else:
        raise ValidationError(f"unknown branch {branch!r}")
    X = np.asarray(tuple(X), dtype=float)
    if not np.all(np.isfinite(X + h)) or np.any(np.abs(X) + h > 1e150):
        raise ValidationError("finite-difference stencil leaves the representable range")
    gam = make_gamma_set().gamma
    psi0 = evaluate(p, field, X, m)
    lhs = -m * psi0
    for mu in range(4):
        step = np.zeros(4)
        step[mu] = h
        deriv = (evaluate(p, field, X + step, m) - evaluate(p, field, X - step, m)) / (2 * h)
        lhs = lhs + 1j * gam[mu] @ deriv
    rhs = c * gauge_potential_slash(field, X[0], X[3]) @ psi0
    res = lhs - rhs
    if not np.all(np.isfinite(res)):
        raise ValidationError("finite-difference stencil produced non-finite values")
    return float(np.linalg.norm(res))
