import os
import subprocess
import sys

import numpy as np
import pytest

from volkovsep import kernels
from volkovsep.grid import GridSpec, SpinorField, free_evolution, to_momentum, to_position
from volkovsep.spinors import energy_projectors, hamiltonian

from oracles import expm_hamiltonian, explicit_free_evolution



def random_nodes(rng, n=37):
    values = rng.normal(size=(4, n)) + 1j * rng.normal(size=(4, n))
    return values, rng.uniform(-2, 2, n), rng.uniform(-2, 2, n), rng.uniform(-2, 2, n)


def test_per_node_kernels_match_dense_algebra(backend, rng):
    values, kx, ky, kz = random_nodes(rng)
    h = kernels.apply_hamiltonian(values, kx, ky, kz, 1.3)
    p = kernels.project(values, kx, ky, kz, 1.3, -1)
    e = kernels.free_evolve(values, kx, ky, kz, 1.3, 0.77)
    for j in range(values.shape[1]):
        k = np.array([kx[j], ky[j], kz[j]])
        assert np.allclose(h[:, j], hamiltonian(k, 1.3) @ values[:, j], atol=1e-13)
        assert np.allclose(p[:, j], energy_projectors(k, 1.3)[1] @ values[:, j], atol=1e-13)
        assert np.allclose(e[:, j], expm_hamiltonian(k, 1.3, 0.77) @ values[:, j], atol=1e-12)


def test_theta_accumulate(backend, rng):
    nt, n = 9, 5
    g = rng.normal(size=(nt, 4, n)) + 1j * rng.normal(size=(nt, 4, n))
    w = rng.uniform(0.1, 1.0, nt)
    fwd = kernels.theta_accumulate(g, w, True)
    bwd = kernels.theta_accumulate(g, w, False)
    for i in range(nt):
        theta_f = np.where(np.arange(nt) < i, 1.0, 0.0)
        theta_f[i] = 0.5
        theta_b = 1.0 - theta_f
        theta_b[i] = 0.5
        assert np.allclose(fwd[i], np.tensordot(w * theta_f, g, axes=1), atol=1e-13)
        assert np.allclose(bwd[i], np.tensordot(w * theta_b, g, axes=1), atol=1e-13)


def test_backends_agree(rng):
    names = kernels.available_backends()
    if len(names) < 2:
        pytest.skip("compiled extension not built")
    values, kx, ky, kz = random_nodes(rng, 257)
    for fn, args in [(kernels.apply_hamiltonian, (1.0,)), (kernels.project, (1.0, 1)),
                     (kernels.free_evolve, (1.0, -3.1))]:
        a = fn(values, kx, ky, kz, *args, backend="python")
        b = fn(values, kx, ky, kz, *args, backend="cython")
        assert np.abs(a - b).max() <= 1e-14
    g = rng.normal(size=(11, 4, 7)) + 0j
    w = rng.uniform(size=11)
    for forward in (True, False):
        a = kernels.theta_accumulate(g, w, forward, backend="python")
        b = kernels.theta_accumulate(g, w, forward, backend="cython")
        assert np.abs(a - b).max() <= 1e-14


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_fallback_selected_by_environment():
    env = dict(os.environ, VOLKOVSEP_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from volkovsep import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("tau", [0.0, 0.4, -1.7, 12.5])
def test_free_evolution_equals_kernel_convolution(tau, backend, rng):
    """Spectral free flight against the O(N^2) S(+)/S(-) lattice kernels on 8 nodes."""
    grid = GridSpec.line(6.0, 8, 0.3, -0.2)
    f = SpinorField(grid, rng.normal(size=(4, 8)) + 1j * rng.normal(size=(4, 8)))
    spectral = to_position(free_evolution(to_momentum(f), tau)).values
    z = grid.axes()[0]
    brute = explicit_free_evolution(f.values, z, grid.lengths[0], grid.transverse, tau)
    assert np.abs(spectral - brute).max() <= 1e-10


def test_free_evolution_unitary(backend, rng):
    grid = GridSpec.line(50.0, 128)
    f = to_momentum(SpinorField(grid, rng.normal(size=(4, 128)) + 0j))
    g = f
    for _ in range(10_000):
        g = free_evolution(g, 0.05)
    assert abs(g.norm2() - f.norm2()) <= 1e-12 * f.norm2()
    back = free_evolution(free_evolution(f, 3.3), -3.3)
    assert np.abs(back.values - f.values).max() <= 1e-12 * np.abs(f.values).max()


def test_benchmark_runs(tmp_path, capsys):
    sys.path.insert(0, str(__import__("pathlib").Path(__file__).parents[1] / "benchmarks"))
    import bench_kernels

    bench_kernels.main(["--nodes", "64", "--slices", "4", "--repeat", "1", "--json", str(tmp_path / "b.json")])
    assert "free_evolve" in capsys.readouterr().out
    assert (tmp_path / "b.json").exists()
