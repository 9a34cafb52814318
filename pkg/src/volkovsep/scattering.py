"""Integral-equation (Feynman propagator) treatment of a switched plane wave.

Fields are handled as histories: arrays ``(nt, 4, n)`` of momentum-space
bispinors on uniform time slices. With the Hamiltonian-form source
``s = gamma^0 * coupling * gamma^mu A_mu psi = -coupling A_x alpha_x psi``,
the kernel integrals of the printed propagator pieces are

    int d^4x' theta(...) S^(+-)(x - x') coupling gamma.A psi(x')
        = sum_j w_j theta(...) i Lambda_+- U(t - t_j) s_j

(``U`` the free evolution, ``w_j`` trapezoid weights, ``theta(0) = 1/2``).
The solution with Feynman boundary conditions propagates the positive
part forward and the negative part backward in time:

    psi = psi_F - I[+, retarded] + I[-, advanced].
"""
import csv
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import NonContractionError, ValidationError
from .grid import MOMENTUM, GridSpec, SpinorField, as_momentum, free_evolution, write_binary
from .volkov import PlaneWaveFieldSpec

MIN_RAMP_PERIODS = 4


@dataclass(frozen=True)
class CompactField:
    """``A_x(t, z) = A g(t) cos(omega (t - z))`` sampled on slices x grid."""

    spec: PlaneWaveFieldSpec
    grid: GridSpec
    times: np.ndarray = field(repr=False)
    coupling: float = 0.05
    check_ramps: bool = True

    def __post_init__(self):
        env = self.spec.envelope
        if env is None:
            raise ValidationError("a compact field needs an envelope")
        if self.grid.dims != 1:
            raise ValidationError("scattering runs on 1D grids along z")
        period = 2 * np.pi / self.spec.omega
        if self.check_ramps and env.ramp < MIN_RAMP_PERIODS * period * (1 - 1e-12):
            raise ValidationError(f"envelope ramps must last at least {MIN_RAMP_PERIODS} wave periods")
        if not self.grid.on_lattice(self.spec.omega):
            raise ValidationError(f"omega={self.spec.omega!r} is not on the momentum lattice of the box")
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise ValidationError("need at least two time slices")
        dt = np.diff(times)
        if np.any(dt <= 0) or np.ptp(dt) > 1e-9 * dt.mean():
            raise ValidationError("time slices must be uniform and increasing")
        if times[0] > env.t_on + 1e-12 or times[-1] < env.t_off - 1e-12:
            raise ValidationError("time slices must cover the field support window")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)

    @classmethod
    def build(cls, spec, grid, coupling=0.05, slices_per_period=128, margin_periods=1.0):
        env = spec.envelope
        if env is None:
            raise ValidationError("a compact field needs an envelope")
        dt = 2 * np.pi / spec.omega / slices_per_period
        start = env.t_on - margin_periods * 2 * np.pi / spec.omega
        count = int(np.ceil((env.t_off + margin_periods * 2 * np.pi / spec.omega - start) / dt - 1e-9)) + 1
        return cls(spec, grid, start + dt * np.arange(count), coupling)

    @property
    def dt(self):
        return float(self.times[1] - self.times[0])

    @property
    def weights(self):
        w = np.full(self.times.size, self.dt)
        w[0] = w[-1] = 0.5 * self.dt
        return w

    @property
    def window(self):
        return self.spec.envelope.t_on, self.spec.envelope.t_off

    def samples(self):
        """``A_x`` on the (slice, node) lattice; exactly zero outside the window."""
        z = self.grid.axes()[0]
        return self.spec.potential_x(self.times[:, None], z[None, :])


@dataclass(frozen=True)
class History:
    """Momentum-space field at every time slice."""

    grid: GridSpec
    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)   # (nt, 4, n)
    m: float = 1.0

    def slice(self, i):
        return SpinorField(self.grid, self.values[i].reshape((4,) + self.grid.shape), MOMENTUM,
                           float(self.times[i]), self.m)

    def norms(self):
        cell = self.grid.momentum_cell_volume
        return np.sqrt(np.sum(np.abs(self.values) ** 2, axis=(1, 2)) * cell)

    def with_values(self, values):
        return History(self.grid, self.times, values, self.m)

    def __add__(self, other):
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        return self.with_values(self.values - other.values)

    def write_binary(self, fh):
        for i in range(self.times.size):
            write_binary(self.slice(i), fh)


def free_history(f0, times):
    """Free evolution of ``f0`` to each slice time."""
    g = as_momentum(f0)
    if g.grid.dims != 1:
        raise ValidationError("scattering runs on 1D grids along z")
    values = np.stack([free_evolution(g, t - g.t).flat() for t in times])
    return History(g.grid, np.asarray(times, dtype=float), values, g.m)


# ---------------------------------------------------------------- helpers

def _tiled_momenta(grid, nt):
    kx, ky, kz = grid.flat_momenta()
    return np.tile(kx, nt), np.tile(ky, nt), np.tile(kz, nt)


def _project_history(values, grid, m, sign):
    nt, _, n = values.shape
    flat = np.ascontiguousarray(values.transpose(1, 0, 2).reshape(4, nt * n))
    kx, ky, kz = _tiled_momenta(grid, nt)
    out = kernels.project(flat, kx, ky, kz, m, sign)
    return out.reshape(4, nt, n).transpose(1, 0, 2)


def _energies(grid, m):
    kx, ky, kz = grid.flat_momenta()
    return np.sqrt(m * m + kx**2 + ky**2 + kz**2)


def _fft_scale(grid):
    dz = grid.spacing[0]
    return dz / np.sqrt(2 * np.pi)


def source_history(psi, cfield):
    """Hamiltonian-form source ``-coupling A_x alpha_x psi`` for every slice."""
    if psi.grid != cfield.grid or psi.times.shape != cfield.times.shape or np.any(psi.times != cfield.times):
        raise ValidationError("history and field use different lattices")
    scale = _fft_scale(psi.grid)
    pos = np.fft.ifft(psi.values, axis=-1) / scale
    ax = cfield.samples()
    swapped = pos[:, [3, 2, 1, 0], :]          # alpha_x swaps (0<->3, 1<->2)
    src = -cfield.coupling * ax[:, None, :] * swapped
    return psi.with_values(np.fft.fft(src, axis=-1) * scale)


def gated_integral(source, weights, sign, retarded):
    """``sum_j w_j theta(+-(t - t_j)) i Lambda_sign U(t - t_j) s_j`` at every slice.

    ``retarded=True`` keeps ``t_j < t``; otherwise ``t_j > t``; coincident
    slices count half.
    """
    energy = _energies(source.grid, source.m)
    t = source.times[:, None, None]
    proj = _project_history(source.values, source.grid, source.m, sign)
    # U(t - t_j) on a Lambda_sign component is exp(-i sign E (t - t_j)).
    g = np.exp(1j * sign * energy[None, None, :] * t) * proj
    acc = kernels.theta_accumulate(g, weights, retarded)
    return source.with_values(1j * np.exp(-1j * sign * energy[None, None, :] * t) * acc)


def apply_feynman_propagator(source, weights, t_eval=None):
    """Feynman-propagated source: ``-I[+, retarded] + I[-, advanced]``.

    With ``t_eval=None`` the result is returned at every slice (a History);
    otherwise as a single SpinorField at ``t_eval`` (must lie within the
    slice range).
    """
    weights = np.asarray(weights, dtype=float)
    if t_eval is None:
        ret = gated_integral(source, weights, +1, True)
        adv = gated_integral(source, weights, -1, False)
        return adv - ret
    t0, t1 = source.times[0], source.times[-1]
    if not (t0 - 1e-12 <= t_eval <= t1 + 1e-12):
        raise ValidationError(f"t_eval={t_eval} outside the computable range [{t0}, {t1}]")
    grid, m = source.grid, source.m
    kx, ky, kz = grid.flat_momenta()
    total = np.zeros((4, grid.size), dtype=complex)
    for w, tj, s in zip(weights, source.times, source.values):
        gap = t_eval - tj
        theta = 0.5 if abs(gap) <= 1e-12 * max(1.0, abs(t_eval)) else float(gap > 0)
        if theta > 0:
            plus = kernels.project(s, kx, ky, kz, m, +1)
            total -= 1j * w * theta * kernels.free_evolve(plus, kx, ky, kz, m, gap)
        if theta < 1:
            minus = kernels.project(s, kx, ky, kz, m, -1)
            total += 1j * w * (1 - theta) * kernels.free_evolve(minus, kx, ky, kz, m, gap)
    return SpinorField(grid, total.reshape((4,) + grid.shape), MOMENTUM, float(t_eval), m)


# ------------------------------------------------------------------ Born

@dataclass(frozen=True)
class BornResult:
    solution: History
    incoming: History
    field: CompactField
    residuals: np.ndarray
    order: int

    @property
    def ratios(self):
        r = self.residuals
        return r[1:] / r[:-1]

    def equation_residual(self):
        """Relative residual of the integral equation for the returned solution."""
        rhs = self.incoming + apply_feynman_propagator(
            source_history(self.solution, self.field), self.field.weights)
        return float((self.solution - rhs).norms().max() / self.incoming.norms().max())

    def write_residual_csv(self, fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "residual", "ratio"])
        for k, r in enumerate(self.residuals, start=1):
            ratio = self.residuals[k - 1] / self.residuals[k - 2] if k > 1 and self.residuals[k - 2] > 0 else ""
            writer.writerow([k, repr(float(r)), repr(float(ratio)) if ratio != "" else ""])


def born_solve(incoming, cfield, order=None, tol=1e-8, max_order=200, min_checked=2):
    """Iterate ``psi <- psi_F + S_F[W psi]``.

    ``order`` fixes the number of iterations; ``None`` iterates until the
    relative step falls below ``tol``. The step ratio is monitored and a
    :class:`NonContractionError` is raised as soon as it reaches 1.
    """
    if order is not None and order < 1:
        raise ValidationError("Born order must be >= 1")
    scale = float(incoming.norms().max())
    if not scale > 0:
        raise ValidationError("incoming field has zero norm")
    weights = cfield.weights
    psi = incoming
    residuals = []
    limit = order if order is not None else max_order
    for k in range(1, limit + 1):
        nxt = incoming + apply_feynman_propagator(source_history(psi, cfield), weights)
        res = float((nxt - psi).norms().max() / scale)
        residuals.append(res)
        psi = nxt
        if len(residuals) >= min_checked and residuals[-2] > 0 and res / residuals[-2] >= 1.0:
            raise NonContractionError(res / residuals[-2], k)
        if order is None and res <= tol:
            break
    else:
        if order is None:
            raise NonContractionError(residuals[-1] / residuals[-2] if len(residuals) > 1 else np.inf, limit)
    return BornResult(psi, incoming, cfield, np.array(residuals), len(residuals))


# -------------------------------------------------------------- channels

@dataclass(frozen=True)
class ChannelSet:
    """Electron scattering (a), positron scattering (b), pair creation (c), pair annihilation (d)."""

    a: History
    b: History
    c: History
    d: History
    solution: History

    LABELS = {"a": "electron scattering", "b": "positron scattering",
              "c": "pair creation", "d": "pair annihilation"}

    @property
    def times(self):
        return self.solution.times

    def norms(self):
        return {name: getattr(self, name).norms() for name in "abcd"}

    def half_sum(self):
        return self.a.with_values(0.5 * (self.a.values + self.b.values + self.c.values + self.d.values))

    def delta(self):
        """``|| psi(t) - (psi_a + psi_b + psi_c + psi_d)(t) / 2 ||`` per slice."""
        return (self.solution - self.half_sum()).norms()

    def write_csv(self, fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "norm_a", "norm_b", "norm_c", "norm_d", "norm_psi", "delta"])
        norms = self.norms()
        psi = self.solution.norms()
        delta = self.delta()
        for i, t in enumerate(self.times):
            writer.writerow([repr(float(t))] + [repr(float(norms[n][i])) for n in "abcd"]
                            + [repr(float(psi[i])), repr(float(delta[i]))])


def split_history(h, sign):
    return h.with_values(_project_history(h.values, h.grid, h.m, sign))


def channel_split(result):
    """Four-part decomposition with the converged solution inside the integrals."""
    src = source_history(result.solution, result.field)
    w = result.field.weights
    inc_plus = split_history(result.incoming, +1)
    inc_minus = result.incoming - inc_plus
    a = inc_plus + gated_integral(src, w, +1, True)
    b = inc_minus + gated_integral(src, w, -1, False)
    c = inc_minus + gated_integral(src, w, +1, False)
    d = inc_plus + gated_integral(src, w, -1, True)
    return ChannelSet(a, b, c, d, result.solution)


# ------------------------------------------------------------ diagnostics

def post_pulse_indices(cfield):
    return np.flatnonzero(cfield.times >= cfield.window[1])


def free_flight_mismatch(result):
    """Max deviation between later slices and free evolution of the first post-pulse slice."""
    idx = post_pulse_indices(result.field)
    if idx.size < 2:
        raise ValidationError("no post-pulse slices to compare")
    first = result.solution.slice(idx[0])
    worst = 0.0
    for i in idx[1:]:
        evolved = free_evolution(first, result.solution.times[i] - first.t)
        worst = max(worst, float(np.abs(evolved.values - result.solution.slice(i).values).max()))
    return worst / float(np.abs(first.values).max())


def post_pulse_fractions(result):
    idx = post_pulse_indices(result.field)
    sol = result.solution
    minus = sol.values[idx] - _project_history(sol.values[idx], sol.grid, sol.m, +1)
    neg = np.sum(np.abs(minus) ** 2, axis=(1, 2))
    tot = np.sum(np.abs(sol.values[idx]) ** 2, axis=(1, 2))
    return neg / tot


def step_doubling_change(f0, spec, grid, coupling=0.05, slices_per_period=128, tol=1e-8):
    """Largest change in final channel norms when the slice step is halved."""
    finals = []
    for spp in (slices_per_period, 2 * slices_per_period):
        cf = CompactField.build(spec, grid, coupling, spp)
        res = born_solve(free_history(f0, cf.times), cf, tol=tol)
        norms = channel_split(res).norms()
        finals.append(np.array([norms[n][-1] for n in "abcd"]))
    return float(np.abs(finals[0] - finals[1]).max())
