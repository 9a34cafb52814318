"""Acceptance gate: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` or directly as a script.
"""
import hashlib
import io
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import explicit_free_evolution, first_order_correction  # noqa: E402
from volkovsep.barrier import BarrierSpec, scattering_coefficients, square_barrier_transmission  # noqa: E402
from volkovsep.cli import main as cli_main  # noqa: E402
from volkovsep.grid import (  # noqa: E402
    GridSpec, SpinorField, apply_projector, free_evolution, gaussian_packet, to_momentum, to_position, volkov_grid,
)
from volkovsep.modes import (  # noqa: E402
    amplitude_scaling, mode_coefficients_bessel, mode_coefficients_quadrature, negative_energy_content,
    reconstruction_error,
)
from volkovsep.observables import ehrenfest_deviation, trajectory  # noqa: E402
from volkovsep.scattering import (  # noqa: E402
    CompactField, born_solve, channel_split, free_history, post_pulse_fractions,
)
from volkovsep.separation import snapshot_phase_scan  # noqa: E402
from volkovsep.spinors import FourMomentum, energy_projectors  # noqa: E402
from volkovsep.volkov import Envelope, PlaneWaveFieldSpec, dirac_residual, volkov_eval  # noqa: E402

P = FourMomentum.electron(0.3, 0.0, 0.2)
REST = FourMomentum.electron()
POINTS = [(0.37, 0.2, -0.4, 1.1), (2.9, -1.3, 0.6, -0.8), (-4.2, 0.0, 1.7, 3.3)]
STEPS = [4e-3, 2e-3, 1e-3]


def _residual_check(branch):
    worst_order, worst_rel = 0.0, 0.0
    for A in (0.1, 0.5):
        for omega in (0.5, 0.8):
            field = PlaneWaveFieldSpec(A, omega)
            for X in POINTS:
                res = [dirac_residual(P, field, X, h=h, branch=branch) for h in STEPS]
                order = np.polyfit(np.log(STEPS), np.log(res), 1)[0]
                rel = res[-1] / np.linalg.norm(volkov_eval(P, field, X))
                worst_order = max(worst_order, abs(order - 2.0))
                worst_rel = max(worst_rel, rel)
    ok = worst_order <= 0.1 and worst_rel <= 1e-5
    return ok, f"max |order - 2| = {worst_order:.2e}, max relative residual at h=1e-3 = {worst_rel:.2e}"


def criterion_1():
    """Volkov solution satisfies the Dirac equation with second-order FD convergence."""
    return _residual_check("electron")


def criterion_2():
    """Quadrature and generalized-Bessel tables agree; the table reconstructs psi_W."""
    field = PlaneWaveFieldSpec(0.5, 0.8)
    quad = mode_coefficients_quadrature(P, field, tail_tol=1e-13)
    bes = mode_coefficients_bessel(P, field, N=quad.N, tail_tol=1e-13)
    diff = float(np.abs(quad.w - bes.w).max())
    pts = np.random.default_rng(2).uniform(-20, 20, (4, 100))
    rec = reconstruction_error(quad, pts)
    return diff <= 1e-12 and rec <= 1e-10, f"N = {quad.N}, table difference = {diff:.2e}, reconstruction = {rec:.2e}"


def criterion_3():
    """Negative-energy content is nonzero for every A > 0 and scales as A^|n|."""
    smallest = np.inf
    for A in (0.1, 0.5, 1.0):
        for omega in (0.5, 0.8, 2.0):
            for p in (REST, P):
                _, fp = negative_energy_content(mode_coefficients_bessel(p, PlaneWaveFieldSpec(A, omega)))
                smallest = min(smallest, fp)
    slopes = amplitude_scaling(REST, 0.8, [-1, -2, -3], [0.01, 0.02, 0.04, 0.08])
    dev = max(max(abs(t - abs(n)), abs(s - abs(n))) for n, (t, s) in slopes.items())
    text = ", ".join(f"n={n}: {t:.4f}/{s:.4f}" for n, (t, s) in slopes.items())
    return smallest > 1e-14 and dev <= 0.1, f"min fraction_projector = {smallest:.3e}; slopes (total/projected) {text}"


def criterion_4():
    """Time-of-flight split matches the mode expansion at 8 snapshot phases."""
    field = PlaneWaveFieldSpec(0.5, 0.8)
    worst, spreads = 0.0, []
    for p in (REST, FourMomentum.electron(0.75, 0.0, 0.0)):
        _, fp = negative_energy_content(mode_coefficients_quadrature(p, field))
        _, fractions = snapshot_phase_scan(p, field, 1.0, volkov_grid(p, field, 4096), phases=8)
        worst = max(worst, float(np.abs(fractions - fp).max() / fp))
        spreads.append(float(np.ptp(fractions)))
    return worst <= 1e-6, f"max relative mismatch = {worst:.2e}, per-phase spread = {max(spreads):.2e}"


def criterion_5():
    """Projector algebra and spectral free flight versus explicit S(+)/S(-) kernels."""
    rng = np.random.default_rng(5)
    ident = np.eye(4)
    worst = 0.0
    for k in rng.uniform(-5, 5, (1000, 3)):
        lp, lm = energy_projectors(k)
        worst = max(worst, np.abs(lp + lm - ident).max(), np.abs(lp @ lp - lp).max(),
                    np.abs(lm @ lm - lm).max(), np.abs(lp @ lm).max())
    grid = GridSpec.line(6.0, 8, 0.3, -0.2)
    f = SpinorField(grid, rng.normal(size=(4, 8)) + 1j * rng.normal(size=(4, 8)))
    kernel_gap = 0.0
    for tau in (0.4, -1.7, 12.5):
        spectral = to_position(free_evolution(to_momentum(f), tau)).values
        brute = explicit_free_evolution(f.values, grid.axes()[0], grid.lengths[0], grid.transverse, tau)
        kernel_gap = max(kernel_gap, float(np.abs(spectral - brute).max()))
    return worst <= 1e-12 and kernel_gap <= 1e-10, f"projector identities = {worst:.2e}, kernel gap = {kernel_gap:.2e}"


def criterion_6():
    """Charge-conjugate branch solves the sign-flipped equation."""
    return _residual_check("positron")


def _weak_run():
    period = 2 * np.pi / 0.8
    spec = PlaneWaveFieldSpec(1.0, 0.8, Envelope(0.0, 4 * period, 0.0))
    grid = GridSpec.line(16 * period, 128)
    cf = CompactField.build(spec, grid, 0.05)
    f0 = gaussian_packet(0.0, 0.1, 1, 1, grid)
    return cf, born_solve(free_history(f0, cf.times), cf, tol=1e-8)


def criterion_7():
    """Born series contracts, matches the first-order oracle, and is free after the pulse."""
    cf, result = _weak_run()
    ratio = float(result.ratios.max())
    final = result.equation_residual()
    flat = float(np.ptp(post_pulse_fractions(result)))
    # first-order oracle on a 16 x 16 lattice
    period = 2 * np.pi / 0.8
    spec = PlaneWaveFieldSpec(1.0, 0.8, Envelope(0.0, 2.0, 0.5))
    grid = GridSpec.line(2 * period, 16, 0.2, 0.0)
    small = CompactField(spec, grid, np.linspace(-0.4, 5.0, 16), 0.3, check_ramps=False)
    f0 = gaussian_packet(0.0, 0.6, 1, 1, grid, band_tol=1.0)
    incoming = free_history(f0, small.times)
    corr = born_solve(incoming, small, order=1).solution - incoming
    probe = to_position(gaussian_packet(0.0, 0.6, -1, 1, grid, band_tol=1.0)).values
    dz = grid.spacing[0]
    brute = first_order_correction(to_position(f0).values, grid.axes()[0], grid.lengths[0], grid.transverse,
                                   small.times, small.weights, small.samples(), small.coupling, small.times[0])
    overlap_gap = abs(np.vdot(probe, to_position(corr.slice(0)).values) * dz - np.vdot(probe, brute) * dz)
    ok = ratio < 1 and final <= 1e-8 and overlap_gap <= 1e-8 and flat <= 1e-10
    return ok, (f"iterations = {result.order}, max ratio = {ratio:.3f}, equation residual = {final:.2e}, "
                f"pair overlap gap = {overlap_gap:.2e}, post-pulse spread = {flat:.2e}")


def criterion_8():
    """Four-channel split: exact zero-coupling limits; Delta(t) measured and emitted, not asserted."""
    period = 2 * np.pi / 0.8
    spec = PlaneWaveFieldSpec(1.0, 0.8, Envelope(0.0, 4 * period, 0.0))
    grid = GridSpec.line(16 * period, 64)
    cf0 = CompactField.build(spec, grid, 0.0, 32)
    f0 = gaussian_packet(0.0, 0.15, 1, 1, grid)
    inc = free_history(f0, cf0.times)
    ch0 = channel_split(born_solve(inc, cf0, order=1))
    plus = inc.with_values(np.stack([apply_projector(inc.slice(i), 1).flat() for i in range(cf0.times.size)]))
    minus = inc - plus
    limit = max(float(np.abs(getattr(ch0, n).values - ref.values).max())
                for n, ref in zip("abcd", (plus, minus, minus, plus)))
    _, result = _weak_run()
    ch = channel_split(result)
    buf = io.StringIO()
    ch.write_csv(buf)
    delta = ch.delta()
    emitted = len(buf.getvalue().splitlines()) == delta.size + 1
    return limit <= 1e-15 and emitted, (f"zero-coupling deviation = {limit:.1e}; Delta(t) max = {delta.max():.4f}, "
                                        f"final = {delta[-1]:.4f} (recorded finding)")


def criterion_9():
    """Zitterbewegung at 2m for a mixed rest packet; absent after projection; Ehrenfest holds."""
    grid = GridSpec.line(400.0, 512)
    plus = gaussian_packet(0.0, 0.05, 1, 1, grid)
    minus = gaussian_packet(0.0, 0.05, -1, -1, grid)
    mixed = plus.with_values((plus.values + minus.values) / np.sqrt(2))
    full = trajectory(mixed, 200.0, 2001)
    proj = trajectory(mixed, 200.0, 2001, projection=1)
    freq = full.dominant_frequency()
    ratio = proj.oscillation_amplitude() / full.oscillation_amplitude()
    ehr = max(ehrenfest_deviation(mixed, t, 0.01) for t in (0.0, 5.3, 50.0))
    ok = abs(freq / 2.0 - 1) <= 0.01 and ratio <= 1e-6 and ehr <= 1e-6
    return ok, f"frequency = {freq:.5f} (2m = 2), projected/mixed amplitude = {ratio:.2e}, Ehrenfest = {ehr:.2e}"


def criterion_10():
    """Barrier transfer matrix: closed form, unitarity, reciprocity."""
    closed = abs(scattering_coefficients(BarrierSpec([1.0], [1.0]), 0.5).T_lr
                 - square_barrier_transmission(1.0, 1.0, 0.5))
    rng = np.random.default_rng(10)
    unit = recip = 0.0
    for _ in range(8):
        n = rng.integers(1, 5)
        spec = BarrierSpec(rng.uniform(-1, 3, n), rng.uniform(0.1, 1.5, n))
        for E in np.linspace(0.05, 6.0, 64):
            c = scattering_coefficients(spec, E)
            unit = max(unit, abs(c.T_lr + c.R_l - 1), abs(c.T_rl + c.R_r - 1))
            recip = max(recip, abs(c.T_lr - c.T_rl))
    ok = closed <= 1e-10 and unit <= 1e-12 and recip <= 1e-12
    return ok, f"closed-form gap = {closed:.1e}, max |T+R-1| = {unit:.1e}, max |T_lr-T_rl| = {recip:.1e}"


def _tree_digest(root):
    h = hashlib.sha256()
    for path in sorted(p for p in root.rglob("*") if p.is_file() and p.name != "manifest.json"):
        h.update(str(path.relative_to(root)).encode())
        h.update(path.read_bytes())
    h.update((root / "sweep.json").read_bytes())
    return h.hexdigest()


def criterion_11():
    """Sweep outputs are bit-identical at 1, 4 and 8 worker threads."""
    digests = []
    with tempfile.TemporaryDirectory() as tmp:
        for threads in (1, 4, 8):
            out = Path(tmp) / f"t{threads}"
            code = cli_main(["--threads", str(threads), "separate", "--horizon", "10",
                             "--sweep", "A=0.2,0.4,0.5,0.6", "--sweep", "phases=4,8", "--out", str(out)])
            if code != 0:
                return False, f"sweep exited with {code} at {threads} threads"
            digests.append(_tree_digest(out))
    return len(set(digests)) == 1, f"digests {', '.join(d[:12] for d in digests)}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


def _report(index, fn):
    start = time.perf_counter()
    ok, detail = fn()
    line = f"[criterion {index:2d}] {'PASS' if ok else 'FAIL'} ({time.perf_counter() - start:.1f}s) {fn.__doc__.strip()} -- {detail}"
    return ok, line


@pytest.mark.parametrize("index", range(1, len(CRITERIA) + 1))
def test_criterion(index, capsys):
    ok, line = _report(index, CRITERIA[index - 1])
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [_report(i, fn) for i, fn in enumerate(CRITERIA, start=1)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
