"""Expectation values along free flight: position, velocity (alpha), norm.

On a periodic box the position mean is taken in a window centred opposite
the seam: the circular mean locates the packet, then the ordinary mean of
the wrapped offsets is added to it. This is exact for localised packets and
continuous as the packet crosses the seam.
"""
import csv
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .grid import POSITION, as_momentum, as_position, free_evolution, to_position
from .separation import split
from .spinors import make_gamma_set

LOCALIZATION_FRACTION = 0.25


def _circular_offsets(density, coord, length):
    kappa = 2 * np.pi / length
    center = np.angle(np.sum(density * np.exp(1j * kappa * coord))) / kappa % length
    offsets = (coord - center + 0.5 * length) % length - 0.5 * length
    return center, offsets


def position_expectation(f, check_localized=True):
    """``<r>`` of a position-space field (length ``dims``; 1D grids give ``[<z>]``)."""
    if f.representation != POSITION:
        raise ValidationError("position expectation needs the position representation")
    dens = f.density()
    total = dens.sum()
    if not total * f.cell > 0:
        raise ValidationError("zero-norm field has no position expectation")
    coords = [f.grid.axes()[0]] if f.grid.dims == 1 else list(f.grid.coordinates())
    out = []
    for axis, (coord, length) in enumerate(zip(coords, f.grid.lengths)):
        coord = np.broadcast_to(coord, dens.shape)
        center, offsets = _circular_offsets(dens, coord, length)
        mean = np.sum(dens * offsets) / total
        if check_localized:
            width = np.sqrt(max(np.sum(dens * offsets**2) / total - mean**2, 0.0))
            if width >= LOCALIZATION_FRACTION * length:
                raise ValidationError(
                    f"packet width {width:.4g} along axis {axis} exceeds L/4 = {length / 4:.4g}")
        out.append((center + mean) % length)
    return np.array(out)


def velocity_expectation(f):
    """``<alpha_i>`` for i = x, y, z (representation independent)."""
    alpha = make_gamma_set().alpha
    flat = f.flat()
    total = np.sum(np.abs(flat) ** 2)
    if not total > 0:
        raise ValidationError("zero-norm field has no velocity expectation")
    return np.array([np.real(np.vdot(flat, np.tensordot(a, flat, axes=(1, 0)))) / total for a in alpha])


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    position: np.ndarray   # (nt, 3)
    velocity: np.ndarray   # (nt, 3)
    norm: np.ndarray
    provenance: str

    def write_csv(self, fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "x", "y", "z", "vx", "vy", "vz", "norm"])
        for t, r, v, n in zip(self.times, self.position, self.velocity, self.norm):
            writer.writerow([repr(float(t))] + [repr(float(c)) for c in r]
                            + [repr(float(c)) for c in v] + [repr(float(n))])

    def oscillation_amplitude(self, axis=2, use="position"):
        """Half peak-to-peak of the series after removing a linear fit."""
        series = self.position[:, axis] if use == "position" else self.velocity[:, axis]
        resid = detrend(self.times, series)
        return float(0.5 * (resid.max() - resid.min()))

    def dominant_frequency(self, axis=2, use="position"):
        series = self.position[:, axis] if use == "position" else self.velocity[:, axis]
        return dominant_frequency(self.times, series)


def detrend(times, series):
    coef = np.polyfit(times - times[0], series, 1)
    return series - np.polyval(coef, times - times[0])


def dominant_frequency(times, series, pad=8):
    """Angular frequency of the strongest spectral peak (Hann window, quadratic peak fit)."""
    times = np.asarray(times)
    dt = times[1] - times[0]
    x = detrend(times, np.asarray(series, dtype=float)) * np.hanning(len(series))
    nfft = pad * len(x)
    spec = np.abs(np.fft.rfft(x, nfft))
    k = int(np.argmax(spec[1:])) + 1
    if 0 < k < len(spec) - 1:
        a, b, c = np.log(spec[k - 1:k + 2] + 1e-300)
        shift = 0.5 * (a - c) / (a - 2 * b + c)
    else:
        shift = 0.0
    return float(2 * np.pi * (k + shift) / (nfft * dt))


def trajectory(f0, T, samples, projection=None, t_start=0.0, positions=True):
    """Record expectation values at ``samples`` equally spaced times over ``[t_start, t_start + T]``.

    ``projection`` may be ``None`` (full field), ``+1`` or ``-1`` (keep one
    energy sign, renormalised). Times are measured from the field's own
    timestamp. In 1D the transverse coordinates are integrated from the
    velocity series (trapezoid, starting at zero).
    """
    g = as_momentum(f0)
    if projection is None:
        provenance = "full"
    elif projection in (1, -1):
        plus, minus, _ = split(g)
        g = plus if projection == 1 else minus
        norm = g.norm()
        if norm < 1e-10:
            raise ValidationError("projected part has negligible norm; nothing to track")
        g = g.scaled(1.0 / norm)
        provenance = "projected-positive" if projection == 1 else "projected-negative"
    else:
        raise ValidationError("projection must be None, +1 or -1")
    times = t_start + T * np.arange(samples) / max(samples - 1, 1)
    pos = np.full((samples, 3), np.nan)
    vel = np.empty((samples, 3))
    norms = np.empty(samples)
    for i, t in enumerate(times):
        h = free_evolution(g, t)
        vel[i] = velocity_expectation(h)
        norms[i] = h.norm()
        if positions:
            r = position_expectation(to_position(h))
            if g.grid.dims == 1:
                pos[i, 2] = r[0]
            else:
                pos[i] = r
    if g.grid.dims == 1:
        steps = 0.5 * (vel[1:, :2] + vel[:-1, :2]) * np.diff(times)[:, None]
        pos[:, :2] = np.vstack([np.zeros((1, 2)), np.cumsum(steps, axis=0)])
    return Trajectory(g.t + times, pos, vel, norms, provenance)


def ehrenfest_deviation(f0, t, dt=0.01, axis=2):
    """``|d<r>/dt - <alpha>|`` at ``t`` using a fourth-order centred difference of ``<r>``."""
    g = as_momentum(f0)
    z = []
    for s in (-2, -1, 1, 2):
        h = to_position(free_evolution(g, t + s * dt))
        r = position_expectation(h)
        z.append(r[0] if g.grid.dims == 1 else r[axis])
    length = g.grid.lengths[0 if g.grid.dims == 1 else axis]
    # unwrap relative to the first sample before differencing
    z = np.asarray(z)
    z = z[0] + ((z - z[0] + 0.5 * length) % length - 0.5 * length)
    deriv = (z[0] - 8 * z[1] + 8 * z[2] - z[3]) / (12 * dt)
    v = velocity_expectation(free_evolution(g, t))[axis]
    return float(abs(deriv - v))


def windowed_volkov(p, field, m, grid, t0=0.0, width=None):
    """Volkov snapshot multiplied by a Gaussian window centred in the box.

    A bare snapshot fills the whole box, so ``<z>`` is undefined; the window
    makes a localised packet whose free flight can be tracked.
    """
    from .grid import sample_volkov

    snap = sample_volkov(p, field, m, grid, t0)
    L = grid.lengths[0]
    width = L / 16 if width is None else width
    z = grid.axes()[0]
    window = np.exp(-((z - 0.5 * L) ** 2) / (4 * width**2))
    f = snap.with_values(snap.values * window)
    return f.scaled(1.0 / f.norm())
