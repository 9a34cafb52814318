import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from volkovsep.errors import ValidationError
from volkovsep.grid import (
    MOMENTUM, POSITION, GridSpec, SpinorField, apply_projector, as_momentum, density_csv,
    gaussian_packet, read_binary, sample_volkov, to_momentum, to_position, translate,
    volkov_grid, write_binary,
)
from volkovsep.modes import mode_coefficients_bessel, period_average_norm2
from volkovsep.spinors import FourMomentum, volkov_spinors
from volkovsep.volkov import PlaneWaveFieldSpec

REST = FourMomentum.electron()
FIELD = PlaneWaveFieldSpec(0.5, 0.8)


def random_field(grid, rng):
    shape = (4,) + grid.shape
    return SpinorField(grid, rng.normal(size=shape) + 1j * rng.normal(size=shape))


@pytest.mark.parametrize("grid", [GridSpec.line(37.0, 64, 0.3, -0.1), GridSpec.cube(12.0, 8)])
def test_round_trip_and_parseval(grid, rng):
    f = random_field(grid, rng)
    g = to_momentum(f)
    assert g.representation == MOMENTUM
    assert abs(g.norm2() - f.norm2()) <= 1e-12 * f.norm2()
    back = to_position(g)
    assert np.abs(back.values - f.values).max() <= 1e-13 * np.abs(f.values).max()
    with pytest.raises(ValidationError):
        to_position(f)
    with pytest.raises(ValidationError):
        to_momentum(g)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([8, 16, 32, 128]), st.floats(1.0, 500.0))
def test_parseval_property(points, length):
    rng = np.random.default_rng(points)
    f = random_field(GridSpec.line(length, points), rng)
    assert np.isclose(to_momentum(f).norm2(), f.norm2(), rtol=1e-12)


def test_grid_validation():
    with pytest.raises(ValidationError):
        GridSpec.line(10.0, 100)
    with pytest.raises(ValidationError):
        GridSpec.line(10.0, 4)
    with pytest.raises(ValidationError):
        GridSpec.line(-1.0, 64)
    grid = GridSpec.line(10.0, 16)
    k = np.sort(grid.momentum_axes()[0])
    assert np.allclose(k, 2 * np.pi * np.arange(-8, 8) / 10.0)


def test_single_plane_wave_hits_one_node():
    grid = GridSpec.line(20.0, 64)
    kz = 2 * np.pi * 3 / 20.0
    u1, _ = volkov_spinors(FourMomentum.electron(0, 0, kz))
    z = grid.axes()[0]
    f = SpinorField(grid, u1[:, None] * np.exp(1j * kz * z)[None])
    dens = to_momentum(f).density()
    peak = int(np.argmax(dens))
    assert np.isclose(grid.momentum_axes()[0][peak], kz)
    assert np.delete(dens, peak).max() <= 1e-24 * dens[peak]


def test_volkov_snapshot_free_limit():
    free = PlaneWaveFieldSpec(0.0, 0.8)
    p = FourMomentum.electron(0.0, 0.0, 0.8)
    grid = volkov_grid(p, free, 64)
    dens = to_momentum(sample_volkov(p, free, 1.0, grid)).density()
    peak = int(np.argmax(dens))
    assert np.isclose(grid.momentum_axes()[0][peak], 0.8)
    assert np.delete(dens, peak).max() <= 1e-24 * dens[peak]


def test_volkov_snapshot_support_matches_modes():
    grid = volkov_grid(REST, FIELD, 4096)
    snap = sample_volkov(REST, FIELD, 1.0, grid)
    g = to_momentum(snap)
    table = mode_coefficients_bessel(REST, FIELD)
    k = grid.momentum_axes()[0]
    expected = {int(round(kz / (2 * np.pi / grid.lengths[0]))) for kz in table.spatial_momenta[:, 2]}
    idx = np.round(k / (2 * np.pi / grid.lengths[0])).astype(int)
    dens = g.density() * grid.momentum_cell_volume
    on = np.isin(idx, list(expected))
    assert dens[~on].max() <= 1e-12 * dens.max()
    # each lattice node carries exactly one mode: |w_n|^2 times the box length
    for kz, n2 in zip(table.spatial_momenta[:, 2], table.norms2):
        node = int(np.argmin(np.abs(k - kz)))
        assert abs(dens[node] - n2 * grid.lengths[0]) <= 1e-10 * grid.lengths[0]


def test_volkov_snapshot_norm():
    grid = volkov_grid(REST, FIELD, 2048)
    snap = sample_volkov(REST, FIELD, 1.0, grid, t0=0.7)
    expected = grid.lengths[0] * period_average_norm2(REST, FIELD)
    assert abs(snap.norm2() - expected) <= 1e-10 * expected


def test_incommensurate_box_is_rejected():
    p = FourMomentum.electron(0.3, 0.0, 0.2)
    with pytest.raises(ValidationError, match="incommensurate"):
        volkov_grid(p, FIELD, 1024)
    grid = GridSpec.line(100.0, 1024)
    with pytest.raises(ValidationError, match="omega"):
        sample_volkov(REST, FIELD, 1.0, grid)
    with pytest.raises(ValidationError, match="aliasing"):
        sample_volkov(REST, FIELD, 1.0, volkov_grid(REST, FIELD, 512))


@pytest.mark.parametrize("sign", [1, -1])
def test_gaussian_packet(sign, backend):
    grid = GridSpec.line(200.0, 512)
    f = gaussian_packet(0.4, 0.1, sign, 1, grid)
    assert f.representation == MOMENTUM
    assert abs(f.norm() - 1.0) <= 1e-14
    assert apply_projector(f, -sign).norm() <= 1e-13
    k = grid.momentum_axes()[0]
    mean_k = np.sum(k * f.density()) * grid.momentum_cell_volume
    assert abs(mean_k - 0.4) <= 0.1 / np.sqrt(512)


def test_gaussian_packet_band_violation():
    with pytest.raises(ValidationError, match="aliasing"):
        gaussian_packet(0.0, 2.0, 1, 1, GridSpec.line(20.0, 32))
    with pytest.raises(ValidationError):
        gaussian_packet(0.0, -1.0, 1, 1, GridSpec.line(20.0, 32))


def test_gaussian_packet_3d():
    grid = GridSpec.cube(40.0, 32)
    f = gaussian_packet([0.0, 0.0, 0.2], 0.15, -1, 1, grid)
    assert abs(f.norm() - 1.0) <= 1e-14
    assert apply_projector(f, 1).norm() <= 1e-13


def test_translate_is_exact_on_lattice_shifts(rng):
    grid = GridSpec.line(32.0, 64)
    f = random_field(grid, rng)
    g = translate(f, 4 * grid.spacing[0])
    assert np.abs(g.values - np.roll(f.values, 4, axis=1)).max() <= 1e-12


def test_binary_round_trip(tmp_path, rng):
    fields = [random_field(GridSpec.line(10.0, 16, 0.2, 0.1), rng),
              as_momentum(random_field(GridSpec.cube(5.0, 8), rng))]
    path = tmp_path / "f.bin"
    with open(path, "wb") as fh:
        for f in fields:
            write_binary(f, fh)
    with open(path, "rb") as fh:
        back = read_binary(fh)
    for a, b in zip(fields, back):
        assert a.grid == b.grid and a.representation == b.representation
        assert np.array_equal(a.values, b.values)
    # header (96 bytes) then 4 complex entries per node, node-major
    raw = path.read_bytes()
    first = np.frombuffer(raw[96:96 + 64], dtype="<f8")
    v = fields[0].values[:, 0]
    assert np.array_equal(first, np.column_stack([v.real, v.imag]).ravel())


def test_binary_rejects_garbage():
    with pytest.raises(ValidationError):
        read_binary(io.BytesIO(b"x" * 96))
    with pytest.raises(ValidationError):
        read_binary(io.BytesIO(b"x" * 10))


def test_density_csv(rng):
    f = random_field(GridSpec.line(10.0, 8), rng)
    buf = io.StringIO()
    density_csv(f, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "x,y,z,density" and len(lines) == 9


def test_fields_are_immutable(rng):
    f = random_field(GridSpec.line(10.0, 8), rng)
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0
    assert f.representation == POSITION
