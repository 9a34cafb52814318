"""Batch command-line driver.

Every command writes data files plus ``manifest.json`` into ``--out``.
Exit codes: 0 success, 2 validation failure, 3 numerical failure; errors
are printed as one line ``error kind=<kind> code=<n> message=<text>``.
"""
import argparse
import hashlib
import itertools
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .errors import NumericalError, ValidationError

THREADS_ENV = "VOLKOVSEP_THREADS"
UNITS = "natural units hbar = c = 1; energies, momenta, frequencies in units of m; lengths and times in 1/m"


# ----------------------------------------------------------- scenarios

def _momentum(params):
    from .spinors import FourMomentum, require_on_shell

    m = params["m"]
    if params.get("E") is None:
        return FourMomentum.electron(params["px"], params["py"], params["pz"], m)
    p = FourMomentum(params["E"], params["px"], params["py"], params["pz"])
    require_on_shell(p, m)
    return p


def _write_json(path, data):
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def run_volkov(params, out):
    from .volkov import PlaneWaveFieldSpec, dirac_residual, volkov_eval

    p = _momentum(params)
    field = PlaneWaveFieldSpec(params["A"], params["omega"])
    m = params["m"]
    t = np.linspace(params["t0"], params["t1"], params["nt"])
    z = np.linspace(params["z0"], params["z1"], params["nz"])
    T, Z = np.meshgrid(t, z, indexing="ij")
    psi = volkov_eval(p, field, (T, params["x"], params["y"], Z), m)
    files = []
    with open(out / "volkov_samples.csv", "w") as fh:
        fh.write("t,x,y,z," + ",".join(f"re{c},im{c}" for c in range(4)) + ",norm2\n")
        for i in range(t.size):
            for j in range(z.size):
                v = psi[:, i, j]
                cells = [T[i, j], params["x"], params["y"], Z[i, j]]
                for c in range(4):
                    cells += [v[c].real, v[c].imag]
                cells.append(float(np.sum(np.abs(v) ** 2)))
                fh.write(",".join(repr(float(x)) for x in cells) + "\n")
    files.append("volkov_samples.csv")
    summary = {"E": p.E, "px": p.px, "py": p.py, "pz": p.pz}
    if params["residual"]:
        X = tuple(params["residual_point"])
        steps = [4e-3, 2e-3, 1e-3]
        scale = float(np.linalg.norm(volkov_eval(p, field, X, m)))
        rows = []
        for branch in ("electron", "positron"):
            for h in steps:
                r = dirac_residual(p, field, X, m, h, params["coupling"], branch)
                rows.append((branch, h, r, r / scale))
        with open(out / "residual.csv", "w") as fh:
            fh.write("branch,h,residual,relative\n")
            for branch, h, r, rel in rows:
                fh.write(f"{branch},{h!r},{r!r},{rel!r}\n")
        files.append("residual.csv")
        for branch in ("electron", "positron"):
            res = [r for b, _, r, _ in rows if b == branch]
            slope = float(np.polyfit(np.log(steps), np.log(res), 1)[0]) if min(res) > 0 else None
            summary[f"{branch}_order"] = slope
            summary[f"{branch}_relative_residual_h1e-3"] = res[-1] / scale
    _write_json(out / "volkov_summary.json", summary)
    files.append("volkov_summary.json")
    return files


def run_modes(params, out):
    from .modes import mode_coefficients_bessel, mode_coefficients_quadrature, negative_energy_content
    from .volkov import PlaneWaveFieldSpec

    p = _momentum(params)
    field = PlaneWaveFieldSpec(params["A"], params["omega"])
    N, tol = params["N"], params["tail_tol"]
    quad = mode_coefficients_quadrature(p, field, params["m"], N=N, tail_tol=tol)
    bes = mode_coefficients_bessel(p, field, params["m"], N=quad.N, tail_tol=tol)
    table = bes if params["method"] == "bessel" else quad
    with open(out / "modes.csv", "w") as fh:
        table.to_csv(fh)
    fs, fp = negative_energy_content(table)
    summary = {
        "N": table.N,
        "method": table.method,
        "quasi_shift": table.quasi_shift,
        "fraction_sign": fs,
        "fraction_projector": fp,
        "method_max_difference": float(np.abs(quad.w - bes.w).max()),
        "total_norm2": float(table.norms2.sum()),
    }
    _write_json(out / "modes_summary.json", summary)
    return ["modes.csv", "modes_summary.json"]


def run_separate(params, out):
    from .grid import sample_volkov, volkov_grid
    from .separation import snapshot_phase_scan, split, time_of_flight
    from .volkov import PlaneWaveFieldSpec

    p = _momentum(params)
    m = params["m"]
    field = PlaneWaveFieldSpec(params["A"], params["omega"])
    grid = volkov_grid(p, field, params["points"], m, params["periods"])
    snap = sample_volkov(p, field, m, grid, params["t0"])
    _, _, report = split(snap)
    with open(out / "separation.json", "w") as fh:
        report.to_json(fh)
    times, fractions = snapshot_phase_scan(p, field, m, grid, params["phases"])
    with open(out / "phases.csv", "w") as fh:
        fh.write("t0,negative_fraction\n")
        for t, f in zip(times, fractions):
            fh.write(f"{float(t)!r},{float(f)!r}\n")
    flight = time_of_flight(snap, params["horizon"], params["samples"])
    with open(out / "flight.csv", "w") as fh:
        fh.write("t,positive_fraction,negative_fraction\n")
        for t, a, b in zip(flight.times, flight.positive_fractions, flight.negative_fractions):
            fh.write(f"{float(t)!r},{float(a)!r},{float(b)!r}\n")
    summary = {
        "box_length": grid.lengths[0],
        "points": grid.points[0],
        "negative_fraction": report.negative_fraction,
        "phase_spread": float(np.ptp(fractions)),
        "flight_spread": flight.spread(),
    }
    _write_json(out / "separate_summary.json", summary)
    return ["separation.json", "phases.csv", "flight.csv", "separate_summary.json"]


def _born_setup(params):
    from .grid import GridSpec, gaussian_packet
    from .scattering import CompactField, free_history
    from .volkov import Envelope, PlaneWaveFieldSpec

    omega = params["omega"]
    period = 2 * np.pi / omega
    env = Envelope(0.0, params["ramp_periods"] * period, params["plateau_periods"] * period)
    spec = PlaneWaveFieldSpec(params["A"], omega, env)
    grid = GridSpec.line(params["box_periods"] * period, params["points"])
    f0 = gaussian_packet(params["k0"], params["sigma"], 1, 1, grid, m=params["m"])
    cf = CompactField.build(spec, grid, params["coupling"], params["slices_per_period"])
    return spec, grid, f0, cf, free_history(f0, cf.times)


def run_born(params, out):
    from .scattering import born_solve, channel_split, free_flight_mismatch, post_pulse_fractions

    _, _, _, cf, incoming = _born_setup(params)
    result = born_solve(incoming, cf, order=params["order"], tol=params["tol"])
    channels = channel_split(result)
    with open(out / "channels.csv", "w") as fh:
        channels.write_csv(fh)
    with open(out / "born_residuals.csv", "w") as fh:
        result.write_residual_csv(fh)
    files = ["channels.csv", "born_residuals.csv"]
    if params["histories"]:
        with open(out / "solution.bin", "wb") as fh:
            result.solution.write_binary(fh)
        files.append("solution.bin")
        for name in "abcd":
            with open(out / f"channel_{name}.bin", "wb") as fh:
                getattr(channels, name).write_binary(fh)
            files.append(f"channel_{name}.bin")
    delta = channels.delta()
    frac = post_pulse_fractions(result)
    summary = {
        "iterations": result.order,
        "residuals": [float(r) for r in result.residuals],
        "max_ratio": float(result.ratios.max()) if result.order > 1 else None,
        "equation_residual": result.equation_residual(),
        "delta_max": float(delta.max()),
        "delta_final": float(delta[-1]),
        "post_pulse_negative_fraction_spread": float(np.ptp(frac)),
        "free_flight_mismatch": free_flight_mismatch(result),
        "slices": int(cf.times.size),
    }
    _write_json(out / "born_summary.json", summary)
    return files + ["born_summary.json"]


def run_zitter(params, out):
    from .grid import GridSpec, gaussian_packet
    from .observables import trajectory

    m = params["m"]
    if params["dims"] == 1:
        grid = GridSpec.line(params["length"], params["points"])
        center = params["k0"]
        energy = float(np.sqrt(m * m + params["k0"] ** 2))
    else:
        if params["points"] > 64:
            raise ValidationError("3D grids are limited to 64 points per dimension")
        grid = GridSpec.cube(params["length"], params["points"])
        center = [0.0, 0.0, params["k0"]]
        energy = float(np.sqrt(m * m + params["k0"] ** 2))
    plus = gaussian_packet(center, params["sigma"], 1, 1, grid, m=m)
    minus = gaussian_packet(center, params["sigma"], -1, -1, grid, m=m)
    weight = params["mix"]
    if not 0.0 <= weight <= 1.0:
        raise ValidationError("mix must lie in [0, 1]")
    f = plus.with_values(np.sqrt(1 - weight) * plus.values + np.sqrt(weight) * minus.values)
    projection = {"none": None, "+": 1, "-": -1}[params["projection"]]
    traj = trajectory(f, params["T"], params["samples"], projection)
    with open(out / "trajectory.csv", "w") as fh:
        traj.write_csv(fh)
    amp = traj.oscillation_amplitude()
    summary = {
        "provenance": traj.provenance,
        "expected_frequency": 2 * energy,
        "frequency": traj.dominant_frequency() if amp > 1e-9 else None,
        "amplitude": amp,
        "norm_drift": float(np.ptp(traj.norm)),
    }
    _write_json(out / "zitter_summary.json", summary)
    return ["trajectory.csv", "zitter_summary.json"]


def run_barrier(params, out):
    from .barrier import BarrierSpec, scattering_coefficients, square_barrier_transmission, sweep_csv

    spec = BarrierSpec(params["V"], params["a"])
    if params["E"] is not None:
        energies = np.array([params["E"]])
    else:
        energies = np.linspace(params["E_min"], params["E_max"], params["nE"])
    if np.any(energies <= 0):
        raise ValidationError("energies must be positive")
    with open(out / "barrier.csv", "w") as fh:
        sweep_csv(spec, energies, fh)
    summary = {"energies": len(energies)}
    if len(spec.heights) == 1:
        V, a = spec.heights[0], spec.widths[0]
        diffs = [abs(scattering_coefficients(spec, E).T_lr - square_barrier_transmission(V, a, E)) for E in energies]
        summary["closed_form_max_difference"] = float(max(diffs))
    _write_json(out / "barrier_summary.json", summary)
    return ["barrier.csv", "barrier_summary.json"]


RUNNERS = {
    "volkov": run_volkov,
    "modes": run_modes,
    "separate": run_separate,
    "born": run_born,
    "zitter": run_zitter,
    "barrier": run_barrier,
}

TOLERANCES = {
    "volkov": {"on_shell_rtol": 1e-12},
    "modes": {"tail_tol": "param"},
    "separate": {"lattice_tol": 1e-9, "tail_tol": 1e-13},
    "born": {"tol": "param", "min_ramp_periods": 4},
    "zitter": {"localization": "width < L/4"},
    "barrier": {},
}


# ------------------------------------------------------------- plumbing

def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def execute(command, params, out):
    """Run one scenario into ``out`` and write its manifest; return the manifest dict."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    files = RUNNERS[command](params, out)
    wall = time.perf_counter() - start
    manifest = {
        "command": command,
        "params": params,
        "units": UNITS,
        "grid": _grid_description(command, params),
        "tolerances": TOLERANCES[command],
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "wall_time": wall,
        "artifacts": [{"path": f, "sha256": sha256(out / f)} for f in files],
    }
    _write_json(out / "manifest.json", manifest)
    return manifest


def _grid_description(command, params):
    if command == "separate":
        return {"dims": 1, "points": params["points"], "length": "commensurate (from omega and quasi-momentum)"}
    if command == "born":
        return {"dims": 1, "points": params["points"], "box_periods": params["box_periods"],
                "slices_per_period": params["slices_per_period"]}
    if command == "zitter":
        return {"dims": params["dims"], "points": params["points"], "length": params["length"]}
    if command == "volkov":
        return {"t": [params["t0"], params["t1"], params["nt"]], "z": [params["z0"], params["z1"], params["nz"]]}
    return None


def _run_one(args):
    command, params, out = args
    manifest = execute(command, params, out)
    return [(a["path"], a["sha256"]) for a in manifest["artifacts"]]


def parse_sweep(specs):
    """``KEY=start:stop:num`` (linspace) or ``KEY=v1,v2,...``."""
    axes = []
    for spec in specs:
        if "=" not in spec:
            raise ValidationError(f"sweep spec {spec!r} must look like KEY=start:stop:num or KEY=v1,v2")
        key, rng = spec.split("=", 1)
        key = key.strip().replace("-", "_")
        if ":" in rng:
            a, b, n = rng.split(":")
            values = [float(v) for v in np.linspace(float(a), float(b), int(n))]
        else:
            values = [float(v) for v in rng.split(",")]
        axes.append((key, values))
    return axes


def run_sweep(command, params, axes, out, threads):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for key, _ in axes:
        if key not in params:
            raise ValidationError(f"cannot sweep unknown parameter {key!r}")
    jobs = []
    for idx, combo in enumerate(itertools.product(*[v for _, v in axes])):
        p = dict(params)
        for (key, _), value in zip(axes, combo):
            p[key] = type(params[key])(value) if isinstance(params[key], (int, float)) and not isinstance(params[key], bool) else value
        jobs.append((command, p, str(out / f"run_{idx:03d}")))
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(job) for job in jobs]
    index = {
        "command": command,
        "sweep": [{"key": k, "values": v} for k, v in axes],
        "runs": [
            {"dir": Path(job[2]).name, "params": job[1],
             "artifacts": [{"path": f, "sha256": h} for f, h in res]}
            for job, res in zip(jobs, results)
        ],
    }
    _write_json(out / "sweep.json", index)
    return index


def read_config(path):
    """Flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def _add_momentum(p):
    p.add_argument("--px", type=float, default=0.0)
    p.add_argument("--py", type=float, default=0.0)
    p.add_argument("--pz", type=float, default=0.0)
    p.add_argument("--E", type=float, default=None, help="energy; must be on-shell if given")
    p.add_argument("--m", type=float, default=1.0)


def _add_wave(p, A=0.5, omega=0.8):
    p.add_argument("--A", type=float, default=A, help="wave amplitude (charge included)")
    p.add_argument("--omega", type=float, default=omega)


def _floats(text):
    return [float(v) for v in text.split(",")]


def build_parser():
    parser = argparse.ArgumentParser(prog="volkovsep", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="flat key = value file (flags override it)")
    parser.add_argument("--threads", type=int, default=None,
                        help=f"worker processes for --sweep (default: ${THREADS_ENV} or 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--sweep", action="append", default=[], metavar="KEY=RANGE",
                       help="sweep a parameter: KEY=start:stop:num or KEY=v1,v2,...")

    p = sub.add_parser("volkov", help="sample the Volkov solution and check the Dirac residual")
    _add_momentum(p)
    _add_wave(p)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=10.0)
    p.add_argument("--nt", type=int, default=11)
    p.add_argument("--z0", type=float, default=0.0)
    p.add_argument("--z1", type=float, default=10.0)
    p.add_argument("--nz", type=int, default=11)
    p.add_argument("--x", type=float, default=0.0)
    p.add_argument("--y", type=float, default=0.0)
    p.add_argument("--residual", action="store_true", help="write the finite-difference residual convergence")
    p.add_argument("--residual-point", type=_floats, default=[0.37, 0.2, -0.4, 1.1], metavar="T,X,Y,Z")
    p.add_argument("--coupling", type=float, default=1.0)
    common(p)

    p = sub.add_parser("modes", help="plane-wave expansion coefficients and negative-energy content")
    _add_momentum(p)
    _add_wave(p)
    p.add_argument("--N", type=int, default=None, help="truncation order (default: from --tail-tol)")
    p.add_argument("--tail-tol", type=float, default=1e-13)
    p.add_argument("--method", choices=["quadrature", "bessel"], default="quadrature")
    common(p)

    p = sub.add_parser("separate", help="time-of-flight separation of a Volkov snapshot")
    _add_momentum(p)
    _add_wave(p)
    p.add_argument("--points", type=int, default=4096)
    p.add_argument("--periods", type=int, default=None, help="box length in wave periods")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--phases", type=int, default=8)
    p.add_argument("--horizon", type=float, default=20.0)
    p.add_argument("--samples", type=int, default=8)
    common(p)

    p = sub.add_parser("born", help="Born series with the Feynman propagator and four-channel split")
    p.add_argument("--m", type=float, default=1.0)
    _add_wave(p, A=1.0)
    p.add_argument("--coupling", type=float, default=0.05)
    p.add_argument("--ramp-periods", type=float, default=4.0)
    p.add_argument("--plateau-periods", type=float, default=0.0)
    p.add_argument("--box-periods", type=int, default=16)
    p.add_argument("--points", type=int, default=128)
    p.add_argument("--k0", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--slices-per-period", type=int, default=128)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--histories", action="store_true", help="also write binary field histories")
    common(p)

    p = sub.add_parser("zitter", help="free-flight trajectory of a mixed-sign packet")
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--k0", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--mix", type=float, default=0.5, help="negative-energy weight in [0, 1]")
    p.add_argument("--projection", choices=["none", "+", "-"], default="none")
    p.add_argument("--T", type=float, default=200.0)
    p.add_argument("--samples", type=int, default=2001)
    p.add_argument("--length", type=float, default=400.0)
    p.add_argument("--points", type=int, default=512)
    p.add_argument("--dims", type=int, choices=[1, 3], default=1)
    common(p)

    p = sub.add_parser("barrier", help="transfer-matrix scattering off a 1D barrier")
    p.add_argument("--V", type=_floats, default=[1.0], help="segment heights, comma separated")
    p.add_argument("--a", type=_floats, default=[1.0], help="segment widths, comma separated")
    p.add_argument("--E", type=float, default=None)
    p.add_argument("--E-min", type=float, default=0.05)
    p.add_argument("--E-max", type=float, default=5.0)
    p.add_argument("--nE", type=int, default=64)
    common(p)

    p = sub.add_parser("replay", help="re-run the scenario recorded in a manifest and compare hashes")
    p.add_argument("manifest")
    p.add_argument("--out", default=None)
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    config = read_config(known.config)
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name, sp in sub_action.choices.items():
        converted = {}
        for action in sp._actions:
            if action.dest in config:
                raw = config[action.dest]
                if isinstance(action, argparse._StoreTrueAction):
                    converted[action.dest] = raw.lower() in ("1", "true", "yes", "on")
                elif action.type is not None:
                    converted[action.dest] = action.type(raw)
                else:
                    converted[action.dest] = raw
        sp.set_defaults(**converted)


def _fail(kind, code, message):
    message = " ".join(str(message).split())
    print(f"error kind={kind} code={code} message={message}", file=sys.stderr)
    return code


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (OSError, ValidationError, ValueError) as exc:
        return _fail("validation", 2, exc)
    args = parser.parse_args(argv)
    threads = args.threads or int(os.environ.get(THREADS_ENV, "1") or 1)
    try:
        if args.command == "replay":
            return _replay(args.manifest, args.out)
        params = {k: v for k, v in vars(args).items() if k not in ("command", "config", "threads", "out", "sweep")}
        if args.sweep:
            run_sweep(args.command, params, parse_sweep(args.sweep), args.out, threads)
        else:
            execute(args.command, params, args.out)
    except ValidationError as exc:
        return _fail("validation", 2, exc)
    except NumericalError as exc:
        return _fail("numerical", 3, exc)
    return 0


def _replay(manifest_path, out):
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text())
    except (OSError, ValueError) as exc:
        raise ValidationError(f"cannot read manifest: {exc}") from exc
    out = Path(out) if out else manifest_path.parent / "replay"
    fresh = execute(manifest["command"], manifest["params"], out)
    old = {a["path"]: a["sha256"] for a in manifest["artifacts"]}
    new = {a["path"]: a["sha256"] for a in fresh["artifacts"]}
    if old != new:
        changed = sorted(k for k in set(old) | set(new) if old.get(k) != new.get(k))
        raise NumericalError(f"replay produced different artifacts: {', '.join(changed)}")
    print(f"replay ok: {len(new)} artifacts identical")
    return 0


if __name__ == "__main__":
    sys.exit(main())
