"""Positive/negative frequency separation by time of flight.

A snapshot is switched to free evolution ("the trap is opened"). Because
free evolution commutes with the energy projectors, the split can be taken
at the snapshot itself; :func:`time_of_flight` records the free flight in
both time directions as an audit trail.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from .grid import (MOMENTUM, SpinorField, apply_projector, as_momentum, free_evolution,
                   sample_volkov, to_momentum, to_position)


@dataclass(frozen=True)
class SeparationReport:
    t0: float
    total_norm2: float
    positive_norm2: float
    negative_norm2: float
    k: np.ndarray = field(repr=False)
    pos2: np.ndarray = field(repr=False)
    neg2: np.ndarray = field(repr=False)

    @property
    def negative_fraction(self):
        return self.negative_norm2 / self.total_norm2

    @property
    def positive_fraction(self):
        return self.positive_norm2 / self.total_norm2

    def as_dict(self):
        nodes = []
        for k, a, b in zip(self.k, self.pos2, self.neg2):
            kk = float(k) if np.ndim(k) == 0 else [float(v) for v in k]
            nodes.append({"k": kk, "pos2": float(a), "neg2": float(b)})
        return {
            "t0": float(self.t0),
            "total_norm2": float(self.total_norm2),
            "positive_norm2": float(self.positive_norm2),
            "negative_norm2": float(self.negative_norm2),
            "nodes": nodes,
        }

    def to_json(self, fh=None, indent=None):
        text = json.dumps(self.as_dict(), indent=indent)
        if fh is None:
            return text
        fh.write(text)


def split(f):
    """Return ``(f_plus, f_minus, report)`` with ``f_plus + f_minus == f``.

    Both parts are returned in momentum representation.
    """
    g = as_momentum(f)
    plus = apply_projector(g, +1)
    minus = g.with_values(g.values - plus.values)
    cell = g.cell
    pos2 = np.sum(np.abs(plus.values) ** 2, axis=0).ravel() * cell
    neg2 = np.sum(np.abs(minus.values) ** 2, axis=0).ravel() * cell
    if g.grid.dims == 1:
        k = g.grid.momentum_axes()[0]
    else:
        k = np.stack([c.ravel() for c in g.grid.node_momenta()], axis=1)
    report = SeparationReport(g.t, g.norm2(), float(pos2.sum()), float(neg2.sum()), k, pos2, neg2)
    return plus, minus, report


def free_evolve(f, dt):
    """Free Dirac evolution by ``dt`` (negative ``dt`` evolves backwards).

    Each node is multiplied by ``exp(-i E dt) Lambda_+ + exp(+i E dt) Lambda_-``.
    The result keeps the input's representation.
    """
    g = as_momentum(f)
    out = free_evolution(g, dt)
    return out if f.representation == MOMENTUM else to_position(out)


@dataclass(frozen=True)
class FlightRecord:
    times: np.ndarray
    reports: list

    @property
    def negative_fractions(self):
        return np.array([r.negative_fraction for r in self.reports])

    @property
    def positive_fractions(self):
        return np.array([r.positive_fraction for r in self.reports])

    def spread(self):
        neg = self.negative_fractions
        return float(neg.max() - neg.min())


def time_of_flight(f, horizon, samples=16):
    """Free flight over ``[t0 - horizon, t0 + horizon]``, splitting at each sample.

    Forward (t > t0) and backward (t < t0) flights both start from the
    snapshot; ``samples`` points are taken on each side.
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    g = as_momentum(f)
    offsets = np.concatenate([-horizon * np.arange(samples, 0, -1) / samples, [0.0],
                              horizon * np.arange(1, samples + 1) / samples])
    reports = []
    for dt in offsets:
        reports.append(split(free_evolution(g, dt))[2])
    return FlightRecord(g.t + offsets, reports)


def snapshot_phase_scan(p, field, m, grid, phases=8):
    """Negative fraction of the Volkov snapshot at ``phases`` instants across one wave period."""
    times = 2 * np.pi * np.arange(phases) / (phases * field.omega)
    fractions = np.array([split(sample_volkov(p, field, m, grid, t))[2].negative_fraction for t in times])
    return times, fractions
