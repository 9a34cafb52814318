"""Transmission and reflection off a piecewise-constant 1D barrier.

Units: hbar = 1, particle mass 1/2, so ``-psi'' + V psi = E psi`` and the
free wavenumber is ``sqrt(E)``.
"""
import csv
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class BarrierSpec:
    heights: tuple
    widths: tuple

    def __post_init__(self):
        heights = tuple(float(v) for v in np.atleast_1d(self.heights))
        widths = tuple(float(v) for v in np.atleast_1d(self.widths))
        object.__setattr__(self, "heights", heights)
        object.__setattr__(self, "widths", widths)
        if len(heights) != len(widths):
            raise ValidationError("each segment needs a height and a width")
        if any(not (w > 0 and np.isfinite(w)) for w in widths):
            raise ValidationError(f"segment widths must be positive, got {widths}")
        if not all(np.isfinite(heights)):
            raise ValidationError("segment heights must be finite")

    @property
    def segments(self):
        return list(zip(self.heights, self.widths))

    @property
    def total_width(self):
        return float(sum(self.widths))


def _segment_matrix(V, a, E):
    """Propagator of ``(psi, psi')`` across one segment (determinant 1)."""
    diff = E - V
    if diff > 0:
        k = np.sqrt(diff)
        c, s = np.cos(k * a), np.sin(k * a)
        return np.array([[c, s / k], [-k * s, c]])
    if diff < 0:
        kappa = np.sqrt(-diff)
        c, s = np.cosh(kappa * a), np.sinh(kappa * a)
        return np.array([[c, s / kappa], [kappa * s, c]])
    return np.array([[1.0, a], [0.0, 1.0]])


def transfer_matrix(spec, E):
    """Map plane-wave amplitudes ``(A, B)`` of ``A e^{ikx} + B e^{-ikx}`` from left to right."""
    if not E > 0:
        raise ValidationError(f"energy must be positive, got {E}")
    k = np.sqrt(E)
    prop = np.eye(2)
    for V, a in spec.segments:
        prop = _segment_matrix(V, a, E) @ prop
    # amplitudes are referred to the left and right edges of the barrier
    basis = np.array([[1.0, 1.0], [1j * k, -1j * k]])
    return np.linalg.solve(basis, prop @ basis)


@dataclass(frozen=True)
class ScatteringCoefficients:
    T_lr: float
    R_l: float
    T_rl: float
    R_r: float

    def as_dict(self):
        return {"T_lr": self.T_lr, "R_l": self.R_l, "T_rl": self.T_rl, "R_r": self.R_r}


def scattering_coefficients(spec, E):
    """The four transmission/reflection probabilities at energy ``E``."""
    M = transfer_matrix(spec, E)
    m22 = M[1, 1]
    # from the left: (t, 0) = M (1, r); from the right: (r', 1) = M (0, t')
    r_left = -M[1, 0] / m22
    t_left = (M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]) / m22
    t_right = 1.0 / m22
    r_right = M[0, 1] / m22
    return ScatteringCoefficients(float(abs(t_left) ** 2), float(abs(r_left) ** 2),
                                  float(abs(t_right) ** 2), float(abs(r_right) ** 2))


def square_barrier_transmission(V, a, E):
    """Closed-form transmission through one rectangular barrier."""
    if E < V:
        kappa = np.sqrt(V - E)
        return 1.0 / (1.0 + V**2 * np.sinh(kappa * a) ** 2 / (4 * E * (V - E)))
    if E > V:
        q = np.sqrt(E - V)
        return 1.0 / (1.0 + V**2 * np.sin(q * a) ** 2 / (4 * E * (E - V)))
    return 1.0 / (1.0 + E * a * a / 4.0)


def sweep_csv(spec, energies, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["E", "T_lr", "R_l", "T_rl", "R_r"])
    for E in energies:
        c = scattering_coefficients(spec, E)
        writer.writerow([repr(float(E)), repr(c.T_lr), repr(c.R_l), repr(c.T_rl), repr(c.R_r)])
