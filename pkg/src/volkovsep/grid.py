"""Bispinor fields on periodic grids with position <-> momentum transforms.

Momentum values approximate the unitary continuous transform
``(2 pi)^{-d/2} int psi(r) exp(-i k.r) d^d r`` so that
``sum |psi|^2 * cell`` is the same in both representations, with cell
volume ``dz`` (position) or ``2 pi / L`` (momentum) per dimension.

One-dimensional grids run along z; the transverse momentum ``(px, py)`` is a
fixed parameter of the grid and enters the Hamiltonian analytically.
"""
import struct
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import ValidationError
from .modes import mode_coefficients_bessel
from .spinors import FourMomentum, charge_conjugate, require_on_shell
from .volkov import ponderomotive_shift, volkov_eval

POSITION = "position"
MOMENTUM = "momentum"
LATTICE_TOL = 1e-9


def _is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    dims: int
    lengths: tuple
    points: tuple
    transverse: tuple = (0.0, 0.0)

    def __post_init__(self):
        lengths = tuple(float(v) for v in np.atleast_1d(self.lengths))
        points = tuple(int(v) for v in np.atleast_1d(self.points))
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "transverse", tuple(float(v) for v in self.transverse))
        if self.dims not in (1, 3):
            raise ValidationError(f"grid must have 1 or 3 active dimensions, got {self.dims}")
        if len(lengths) != self.dims or len(points) != self.dims:
            raise ValidationError("lengths and points must match dims")
        if any(not (L > 0 and np.isfinite(L)) for L in lengths):
            raise ValidationError(f"box lengths must be positive, got {lengths}")
        if any(n < 8 or not _is_power_of_two(n) for n in points):
            raise ValidationError(f"points per dimension must be a power of two >= 8, got {points}")
        if self.dims == 3 and self.transverse != (0.0, 0.0):
            raise ValidationError("transverse momentum is a 1D-grid parameter only")

    @classmethod
    def line(cls, length, points, px=0.0, py=0.0):
        return cls(1, (length,), (points,), (px, py))

    @classmethod
    def cube(cls, length, points):
        return cls(3, (length,) * 3, (points,) * 3)

    @property
    def shape(self):
        return self.points

    @property
    def spacing(self):
        return tuple(L / n for L, n in zip(self.lengths, self.points))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    @property
    def momentum_cell_volume(self):
        return float(np.prod([2 * np.pi / L for L in self.lengths]))

    @property
    def size(self):
        return int(np.prod(self.points))

    def axes(self):
        return [np.arange(n) * (L / n) for L, n in zip(self.lengths, self.points)]

    def momentum_axes(self):
        """Lattice wavenumbers ``2 pi j / L``, ``j`` in ``[-n/2, n/2)``, in FFT order."""
        return [2 * np.pi * np.fft.fftfreq(n, d=L / n) for L, n in zip(self.lengths, self.points)]

    def coordinates(self):
        """Position of every node as ``(x, y, z)`` arrays of grid shape (1D: zeros for x, y)."""
        if self.dims == 1:
            z = self.axes()[0]
            return np.zeros_like(z), np.zeros_like(z), z
        return tuple(np.meshgrid(*self.axes(), indexing="ij"))

    def node_momenta(self):
        """``(kx, ky, kz)`` at every node, each of grid shape."""
        if self.dims == 1:
            kz = self.momentum_axes()[0]
            return np.full_like(kz, self.transverse[0]), np.full_like(kz, self.transverse[1]), kz
        return tuple(np.meshgrid(*self.momentum_axes(), indexing="ij"))

    def flat_momenta(self):
        return tuple(np.ascontiguousarray(k.ravel()) for k in self.node_momenta())

    def momentum_band(self):
        return [np.pi * n / L for L, n in zip(self.lengths, self.points)]

    def on_lattice(self, k, axis=-1):
        L = self.lengths[axis]
        j = k * L / (2 * np.pi)
        return abs(j - round(j)) <= LATTICE_TOL * max(1.0, abs(j))


@dataclass(frozen=True)
class SpinorField:
    grid: GridSpec
    values: np.ndarray = field(repr=False)
    representation: str = POSITION
    t: float = 0.0
    m: float = 1.0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128)
        if values.shape != (4,) + self.grid.shape:
            raise ValidationError(f"values must have shape {(4,) + self.grid.shape}, got {values.shape}")
        if self.representation not in (POSITION, MOMENTUM):
            raise ValidationError(f"unknown representation {self.representation!r}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("field contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def cell(self):
        return self.grid.cell_volume if self.representation == POSITION else self.grid.momentum_cell_volume

    def density(self):
        return np.sum(np.abs(self.values) ** 2, axis=0)

    def norm2(self):
        return float(np.sum(self.density()) * self.cell)

    def norm(self):
        return float(np.sqrt(self.norm2()))

    def flat(self):
        return self.values.reshape(4, -1)

    def with_values(self, values, **changes):
        return replace(self, values=values, **changes)

    def __add__(self, other):
        _check_compatible(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        _check_compatible(self, other)
        return self.with_values(self.values - other.values)

    def scaled(self, factor):
        return self.with_values(self.values * factor)

    def inner(self, other):
        """``<self|other>`` including the cell volume."""
        _check_compatible(self, other)
        return complex(np.vdot(self.values, other.values) * self.cell)


def _check_compatible(a, b):
    if a.grid != b.grid or a.representation != b.representation:
        raise ValidationError("fields live on different grids or representations")


def _fft_scale(grid):
    return float(np.prod([d / np.sqrt(2 * np.pi) for d in grid.spacing]))


def to_momentum(f):
    if f.representation != POSITION:
        raise ValidationError("to_momentum expects a position-representation field")
    axes = tuple(range(1, f.grid.dims + 1))
    values = np.fft.fftn(f.values, axes=axes) * _fft_scale(f.grid)
    return f.with_values(values, representation=MOMENTUM)


def to_position(f):
    if f.representation != MOMENTUM:
        raise ValidationError("to_position expects a momentum-representation field")
    axes = tuple(range(1, f.grid.dims + 1))
    values = np.fft.ifftn(f.values, axes=axes) / _fft_scale(f.grid)
    return f.with_values(values, representation=POSITION)


def as_momentum(f):
    return f if f.representation == MOMENTUM else to_momentum(f)


def as_position(f):
    return f if f.representation == POSITION else to_position(f)


# ----------------------------------------------------------------- Volkov

def commensurate_length(omega, kz, max_index=1 << 16):
    """Smallest box length putting both ``omega`` and ``kz`` on the lattice."""
    ratio = Fraction(kz / omega).limit_denominator(max_index)
    if abs(float(ratio) - kz / omega) > LATTICE_TOL * max(1.0, abs(kz / omega)):
        raise ValidationError(
            f"wavenumbers omega={omega!r} and kz={kz!r} are incommensurate on any lattice "
            f"with fewer than {max_index} wave periods"
        )
    return 2 * np.pi * ratio.denominator / omega


def volkov_grid(p, field, points, m=1.0, periods=None):
    """1D grid on which the Volkov snapshot is exactly periodic."""
    kz = p.pz + ponderomotive_shift(p, field)
    L = commensurate_length(field.omega, kz)
    if periods is not None:
        base = round(L * field.omega / (2 * np.pi))
        if periods % base:
            raise ValidationError(f"box must hold a multiple of {base} periods")
        L = 2 * np.pi * periods / field.omega
    return GridSpec.line(L, points, p.px, p.py)


def sample_volkov(p, field, m, grid, t0=0.0, tail_tol=1e-13):
    """Position-space snapshot of psi_W at time ``t0`` on a 1D grid along z."""
    require_on_shell(p, m)
    if grid.dims != 1:
        raise ValidationError("Volkov snapshots live on 1D grids along z")
    if not np.allclose(grid.transverse, (p.px, p.py), rtol=0, atol=1e-15):
        raise ValidationError(f"grid transverse momentum {grid.transverse} must equal (px, py)=({p.px}, {p.py})")
    kz = p.pz + ponderomotive_shift(p, field)
    bad = [(name, k) for name, k in (("omega", field.omega), ("pz+A^2/(4(E-pz))", kz)) if not grid.on_lattice(k)]
    if bad:
        names = ", ".join(f"{name}={k!r}" for name, k in bad)
        raise ValidationError(
            f"incommensurate box L={grid.lengths[0]!r}: {names} not on the momentum lattice 2*pi*j/L"
        )
    if field.A > 0:
        table = mode_coefficients_bessel(p, field, m, tail_tol=tail_tol)
        reach = abs(kz) + table.N * field.omega
        if reach >= grid.momentum_band()[0]:
            raise ValidationError(
                f"mode ladder reaches |k|={reach:.4g}, beyond the lattice band {grid.momentum_band()[0]:.4g} (aliasing)"
            )
    z = grid.axes()[0]
    values = volkov_eval(p, field, (t0, 0.0, 0.0, z), m)
    return SpinorField(grid, values, POSITION, float(t0), float(m))


# ---------------------------------------------------------- wave packets

def spinor_field_u(kx, ky, kz, s, m):
    """Vectorised ``u(k, s)`` (normalised to 2E/m) for arrays of momenta."""
    energy = np.sqrt(m * m + kx**2 + ky**2 + kz**2)
    norm = np.sqrt((energy + m) / m)
    kp = kx + 1j * ky
    km = kx - 1j * ky
    out = np.zeros((4,) + np.shape(kx), dtype=complex)
    if s == 1:
        out[0] = 1.0
        out[2] = kz / (energy + m)
        out[3] = kp / (energy + m)
    elif s == -1:
        out[1] = 1.0
        out[2] = km / (energy + m)
        out[3] = -kz / (energy + m)
    else:
        raise ValidationError(f"spin label must be +1 or -1, got {s!r}")
    return norm * out


def spinor_field_v(kx, ky, kz, s, m):
    """Vectorised ``v(k, s) = i gamma^2 u(k, s)*``."""
    return charge_conjugate(spinor_field_u(kx, ky, kz, s, m))


def gaussian_packet(center, sigma, sign, spin, grid, t0=0.0, m=1.0, position=None, band_tol=1e-12):
    """Momentum-space Gaussian of pure energy sign, normalised to unit norm.

    Sign ``+1`` uses ``u(k, s)``; sign ``-1`` uses ``v(-k, s)`` (the
    negative-energy eigenvector of ``H(k)``). ``position`` sets the packet
    centre in the box (default: the box centre).
    """
    if not sigma > 0:
        raise ValidationError(f"packet width must be positive, got {sigma}")
    if sign not in (1, -1):
        raise ValidationError("sign must be +1 or -1")
    kx, ky, kz = grid.node_momenta()
    if grid.dims == 1:
        center = np.broadcast_to(np.asarray(center, dtype=float), (1,))[-1]
        r2 = (kz - center) ** 2
    else:
        c = np.broadcast_to(np.asarray(center, dtype=float), (3,))
        r2 = (kx - c[0]) ** 2 + (ky - c[1]) ** 2 + (kz - c[2]) ** 2
    weight = np.exp(-r2 / (4 * sigma**2))
    if _edge_weight(weight, grid) > band_tol * weight.max():
        raise ValidationError("packet spectrum does not decay inside the lattice band (aliasing)")
    if sign == 1:
        spinor = spinor_field_u(kx, ky, kz, spin, m)
    else:
        spinor = spinor_field_v(-kx, -ky, -kz, spin, m)
    if position is None:
        position = [L / 2 for L in grid.lengths]
    position = np.broadcast_to(np.asarray(position, dtype=float), (grid.dims,))
    if grid.dims == 1:
        shift = np.exp(-1j * kz * position[0])
    else:
        shift = np.exp(-1j * (kx * position[0] + ky * position[1] + kz * position[2]))
    values = weight * shift * spinor
    f = SpinorField(grid, values, MOMENTUM, float(t0), float(m))
    return f.scaled(1.0 / f.norm())


def _edge_weight(weight, grid):
    edge = 0.0
    for axis, n in enumerate(grid.points):
        edge = max(edge, float(np.take(weight, n // 2, axis=axis).max()))
    return edge


def translate(f, shift):
    """Periodic translation by ``shift`` (applied as a momentum phase)."""
    g = as_momentum(f)
    kx, ky, kz = g.grid.node_momenta()
    shift = np.broadcast_to(np.asarray(shift, dtype=float), (g.grid.dims,))
    phase = np.exp(-1j * kz * shift[0]) if g.grid.dims == 1 else np.exp(
        -1j * (kx * shift[0] + ky * shift[1] + kz * shift[2]))
    out = g.with_values(g.values * phase)
    return out if f.representation == MOMENTUM else to_position(out)


# ----------------------------------------------------------------- kernels

def apply_projector(f, sign):
    g = as_momentum(f)
    kx, ky, kz = g.grid.flat_momenta()
    values = kernels.project(g.flat(), kx, ky, kz, g.m, sign).reshape(g.values.shape)
    return g.with_values(values)


def free_evolution(f, dt):
    if f.representation != MOMENTUM:
        raise ValidationError("free evolution expects a momentum-representation field")
    kx, ky, kz = f.grid.flat_momenta()
    values = kernels.free_evolve(f.flat(), kx, ky, kz, f.m, dt).reshape(f.values.shape)
    return f.with_values(values, t=f.t + dt)


# ----------------------------------------------------------------- export

MAGIC = b"VSFIELD1"
_HEADER = struct.Struct("<8sIIdddd3Q3d")
_REPR_CODE = {POSITION: 0, MOMENTUM: 1}


def write_binary(f, fh):
    """Append one field frame: fixed header then interleaved float64 Re/Im per component."""
    points = list(f.grid.points) + [0] * (3 - f.grid.dims)
    lengths = list(f.grid.lengths) + [0.0] * (3 - f.grid.dims)
    fh.write(_HEADER.pack(MAGIC, f.grid.dims, _REPR_CODE[f.representation], f.t, f.m,
                          f.grid.transverse[0], f.grid.transverse[1], *points, *lengths))
    # node-major, component-minor: node0 (re0 im0 re1 im1 ...), node1 ...
    data = np.empty((f.grid.size, 4, 2), dtype="<f8")
    flat = f.flat().T
    data[:, :, 0] = flat.real
    data[:, :, 1] = flat.imag
    fh.write(data.tobytes())


def read_binary(fh):
    """Read every frame in a file written by :func:`write_binary`."""
    frames = []
    while True:
        head = fh.read(_HEADER.size)
        if not head:
            return frames
        if len(head) != _HEADER.size:
            raise ValidationError("truncated field header")
        magic, dims, rep, t, m, px, py, *rest = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ValidationError("not a field file")
        points = tuple(rest[:dims])
        lengths = tuple(rest[3:3 + dims])
        grid = GridSpec(dims, lengths, points, (px, py))
        nbytes = grid.size * 4 * 2 * 8
        data = np.frombuffer(fh.read(nbytes), dtype="<f8")
        if data.size * 8 != nbytes:
            raise ValidationError("truncated field data")
        data = data.reshape(grid.size, 4, 2)
        values = (data[:, :, 0] + 1j * data[:, :, 1]).T.reshape((4,) + grid.shape)
        rep_name = POSITION if rep == 0 else MOMENTUM
        frames.append(SpinorField(grid, values, rep_name, t, m))


def density_csv(f, fh):
    """CSV of ``|psi|^2`` per node (coordinates in the field's representation)."""
    coords = f.grid.coordinates() if f.representation == POSITION else f.grid.node_momenta()
    names = ("x", "y", "z") if f.representation == POSITION else ("kx", "ky", "kz")
    fh.write(",".join(names) + ",density\n")
    dens = f.density().ravel()
    cols = [np.broadcast_to(c, f.grid.shape).ravel() for c in coords]
    for i in range(dens.size):
        fh.write(",".join(repr(float(c[i])) for c in cols) + f",{float(dens[i])!r}\n")
