"""Discrete plane-wave (photon-number) expansion of the Volkov solution.

Writing ``phase = omega (t - z)``, the Volkov wavefunction factorises as

    psi_W = exp(-i p.x) exp(-i delta (t - z)) F(phase),   delta = A^2 / (4 (E - pz))

with ``F`` 2pi-periodic. Its Fourier series ``F = sum_n w_n exp(-i n phase)``
gives ``psi_W = sum_n w_n exp(-i q_n.x) exp(-i delta (t - z))`` with
``q_n = (E + n omega, px, py, pz + n omega)``. The drift factor is kept
separately: ``q_n`` is stored exactly as the ladder ``p + n k`` and the
physical (quasi-)momentum of mode ``n`` is ``q_n + delta (1, 0, 0, 1)``.
"""
import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import NumericalError, TailError, ValidationError
from .spinors import FourMomentum, energy_projectors, require_on_shell, volkov_spinors
from .volkov import PlaneWaveFieldSpec, periodic_factor, ponderomotive_shift, volkov_eval

DEFAULT_TAIL_TOL = 1e-13
MAX_ORDER = 256


@dataclass(frozen=True)
class ModeTable:
    n: np.ndarray
    q: np.ndarray          # (len(n), 4), the ladder p + n k
    w: np.ndarray          # (len(n), 4) complex, combined coefficient c_n v_n
    p: FourMomentum
    field: PlaneWaveFieldSpec
    m: float
    N: int
    method: str

    def __post_init__(self):
        if len(self.n) == 0:
            raise ValidationError("empty mode table")

    @property
    def quasi_shift(self):
        return ponderomotive_shift(self.p, self.field)

    @property
    def quasi_momenta(self):
        shift = self.quasi_shift
        return self.q + shift * np.array([1.0, 0.0, 0.0, 1.0])

    @property
    def spatial_momenta(self):
        """Spatial momentum actually carried by each mode (includes the drift)."""
        return self.quasi_momenta[:, 1:]

    @property
    def norms2(self):
        return np.sum(np.abs(self.w) ** 2, axis=1)

    def coefficient(self, order):
        idx = np.flatnonzero(self.n == order)
        if idx.size == 0:
            raise KeyError(order)
        return self.w[idx[0]]

    def four_momentum(self, idx):
        q = self.q[idx]
        return FourMomentum(*q, on_shell=bool(self.n[idx] == 0))

    def reconstruct(self, X):
        """``sum_n w_n exp(-i q_n.x)`` times the drift factor, at ``X = (t, x, y, z)``."""
        t, x, y, z = np.broadcast_arrays(*(np.asarray(c, dtype=float) for c in X))
        q = self.q
        total = np.zeros((4,) + t.shape, dtype=complex)
        for qn, wn in zip(q, self.w):
            phase = np.exp(-1j * (qn[0] * t - qn[1] * x - qn[2] * y - qn[3] * z))
            total += wn[(...,) + (None,) * t.ndim] * phase
        return total * np.exp(-1j * self.quasi_shift * (t - z))

    def to_csv(self, fh=None):
        """Write columns n, q0..q3, Re/Im of the four entries, |w_n|^2."""
        own = fh is None
        fh = io.StringIO() if own else fh
        writer = csv.writer(fh, lineterminator="\n")
        header = ["n", "q0", "q1", "q2", "q3"]
        for c in range(4):
            header += [f"re{c}", f"im{c}"]
        writer.writerow(header + ["norm2"])
        for n, q, w, nn in zip(self.n, self.q, self.w, self.norms2):
            row = [int(n)] + [repr(float(v)) for v in q]
            for c in range(4):
                row += [repr(float(w[c].real)), repr(float(w[c].imag))]
            writer.writerow(row + [repr(float(nn))])
        return fh.getvalue() if own else None


def ladder(p, omega, orders):
    orders = np.asarray(orders)
    q = np.empty((len(orders), 4))
    q[:, 0] = p.E + orders * omega
    q[:, 1] = p.px
    q[:, 2] = p.py
    q[:, 3] = p.pz + orders * omega
    return q


def _quadrature(p, field, m, orders, points):
    phase = 2 * np.pi * np.arange(points) / points
    f = periodic_factor(p, field, phase, m)                      # (4, points)
    kernel = np.exp(1j * np.outer(orders, phase)) / points       # (norders, points)
    return kernel @ f.T


def _pick_truncation(norms, orders, tol):
    """Smallest N whose omitted orders |n| > N all sit below ``tol``."""
    above = np.abs(orders[np.sqrt(norms) >= tol])
    return int(above.max()) if above.size else 0


def _finish(p, field, m, orders, w, N, tol, method):
    norms = np.sum(np.abs(w) ** 2, axis=1)
    tail = np.sqrt(norms[np.abs(orders) == N + 1]).max()
    if tail >= tol:
        raise TailError(f"truncation N={N} leaves modes above tolerance {tol:g}", tail)
    keep = np.abs(orders) <= N
    n = orders[keep]
    return ModeTable(n, ladder(p, field.omega, n), w[keep], p, field, m, N, method)


def mode_coefficients_quadrature(p, field, m=1.0, N=None, quad_points=None, tail_tol=DEFAULT_TAIL_TOL):
    """Fourier coefficients of the periodic factor by the uniform trapezoid rule.

    ``N=None`` picks the truncation from ``tail_tol`` (capped at 256).
    """
    require_on_shell(p, m)
    if N is None:
        probe = np.arange(-MAX_ORDER - 1, MAX_ORDER + 2)
        w = _quadrature(p, field, m, probe, 16 * (MAX_ORDER + 1))
        N = _pick_truncation(np.sum(np.abs(w) ** 2, axis=1), probe, tail_tol)
        if N > MAX_ORDER:
            raise TailError(f"no truncation up to N={MAX_ORDER} meets {tail_tol:g}",
                            float(np.sqrt(np.sum(np.abs(w[0]) ** 2))))
    if N < 0:
        raise ValidationError("truncation order must be >= 0")
    points = quad_points if quad_points is not None else max(16 * (N + 1), 64)
    if points < 8 * (N + 1):
        raise ValidationError(f"need at least 8(N+1) = {8 * (N + 1)} quadrature points, got {points}")
    orders = np.arange(-N - 1, N + 2)
    w = _quadrature(p, field, m, orders, points)
    return _finish(p, field, m, orders, w, N, tail_tol, "quadrature")


def generalized_bessel(orders, a, b, tol=1e-17, max_terms=512):
    """Two-variable Bessel function ``sum_k J_{n-2k}(a) J_k(b)`` for each order.

    These are the Fourier coefficients of ``exp(i (a sin x + b sin 2x))``.
    """
    orders = np.atleast_1d(np.asarray(orders, dtype=int))
    if b == 0.0:
        return special.jv(orders, a).astype(complex)
    kmax = 8
    while True:
        k = np.arange(-kmax, kmax + 1)
        jb = special.jv(k, b)
        if np.abs(jb[[0, -1]]).max() < tol:
            break
        kmax *= 2
        if kmax > max_terms:
            raise NumericalError(f"generalized Bessel inner sum not converged for b={b}")
    ja = special.jv(orders[:, None] - 2 * k[None, :], a)
    return (ja * jb[None, :]).sum(axis=1).astype(complex)


def bessel_arguments(p, field):
    """Arguments ``(a, b)`` of the two sine terms in the oscillating Volkov phase."""
    lc = field.omega * (p.E - p.pz)
    return field.A * p.px / lc, -field.A**2 / (8 * lc)


def _bessel_coefficients(p, field, m, orders):
    u1, u2 = volkov_spinors(p, m)
    a, b = bessel_arguments(p, field)
    # exp(i(...)) = sum_j G_j exp(i j phase); mode n multiplies exp(-i n phase).
    span = np.arange(-orders.max() - 2, -orders.min() + 3)
    g = dict(zip(span.tolist(), generalized_bessel(span, a, b)))
    w = np.empty((len(orders), 4), dtype=complex)
    for i, n in enumerate(orders.tolist()):
        w[i] = g[-n] * u1 - 0.5 * field.A * (g[-n + 1] + g[-n - 1]) * u2
    return w


def mode_coefficients_bessel(p, field, m=1.0, N=None, tail_tol=DEFAULT_TAIL_TOL):
    """Same table as the quadrature route, via the Jacobi-Anger expansion."""
    require_on_shell(p, m)
    if field.envelope is not None:
        raise ValidationError("mode expansion requires the infinite wave (no envelope)")
    if N is None:
        probe = np.arange(-MAX_ORDER - 1, MAX_ORDER + 2)
        w = _bessel_coefficients(p, field, m, probe)
        N = _pick_truncation(np.sum(np.abs(w) ** 2, axis=1), probe, tail_tol)
        if N > MAX_ORDER:
            raise TailError(f"no truncation up to N={MAX_ORDER} meets {tail_tol:g}",
                            float(np.sqrt(np.sum(np.abs(w[0]) ** 2))))
    orders = np.arange(-N - 1, N + 2)
    w = _bessel_coefficients(p, field, m, orders)
    return _finish(p, field, m, orders, w, N, tail_tol, "bessel")


def negative_energy_content(table):
    """Return ``(fraction_sign, fraction_projector)``.

    ``fraction_sign`` counts the weight of modes whose ladder energy
    ``E + n omega`` is negative. ``fraction_projector`` is the weight left by
    the negative-energy projector at each mode's spatial momentum.
    """
    norms = table.norms2
    total = norms.sum()
    if not total > 0:
        raise ValidationError("mode table has zero norm")
    fraction_sign = norms[table.q[:, 0] < 0].sum() / total
    neg = 0.0
    for k, w in zip(table.spatial_momenta, table.w):
        _, lam_minus = energy_projectors(k, table.m)
        neg += np.sum(np.abs(lam_minus @ w) ** 2)
    return float(fraction_sign), float(neg / total)


def period_average_norm2(p, field, m=1.0, points=4096):
    """Average of ``|F(phase)|^2`` over one period (trapezoid rule)."""
    phase = 2 * np.pi * np.arange(points) / points
    f = periodic_factor(p, field, phase, m)
    return float(np.mean(np.sum(np.abs(f) ** 2, axis=0)))


def amplitude_scaling(p, omega, orders, amplitudes, m=1.0, method="bessel"):
    """Log-log slopes of ``|w_n|`` and ``|Lambda_minus w_n|`` against the amplitude.

    Returns ``{n: (slope_total, slope_negative)}``.
    """
    build = mode_coefficients_bessel if method == "bessel" else mode_coefficients_quadrature
    orders = list(orders)
    mags = {n: [] for n in orders}
    negs = {n: [] for n in orders}
    for A in amplitudes:
        table = build(p, PlaneWaveFieldSpec(A, omega), m, N=max(abs(n) for n in orders) + 8,
                      tail_tol=np.inf)
        for n in orders:
            idx = int(np.flatnonzero(table.n == n)[0])
            _, lam_minus = energy_projectors(table.spatial_momenta[idx], m)
            mags[n].append(np.linalg.norm(table.w[idx]))
            negs[n].append(np.linalg.norm(lam_minus @ table.w[idx]))
    logA = np.log(amplitudes)
    out = {}
    for n in orders:
        s_tot = np.polyfit(logA, np.log(mags[n]), 1)[0]
        s_neg = np.polyfit(logA, np.log(negs[n]), 1)[0]
        out[n] = (float(s_tot), float(s_neg))
    return out


def reconstruction_error(table, points):
    """Max relative deviation of the table's sum from ``volkov_eval`` at ``points`` (shape (4, k))."""
    points = np.asarray(points, dtype=float)
    exact = volkov_eval(table.p, table.field, points, table.m)
    approx = table.reconstruct(points)
    return float(np.max(np.linalg.norm(approx - exact, axis=0) / np.linalg.norm(exact, axis=0)))
