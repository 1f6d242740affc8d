# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

"""
Discrete parabolic phase space.

Fields live on the periodic torus (R/LxZ)^n x R/LtZ. The Fourier transform is
the unitary one (``norm="ortho"``) and every L2 quantity is weighted by the
cell volume dV = dx^n dt, on both sides, so that Parseval is exact and norms
of a band-limited field do not depend on the resolution.
"""

import struct

import numpy as np
from scipy import integrate

from paradirac import error, log
from paradirac.utils.cache import memoize_property


logger = log.get_logger(__name__)

PHYSICAL = "physical"
SPECTRAL = "spectral"

_SIDES = (PHYSICAL, SPECTRAL)

SNAPSHOT_MAGIC = b"PDIR"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIIIIBB10x")


class Grid(object):
    """
    Periodic (x, t) grid with `Nx` points per spatial axis and `Nt` in time.

    The parabolic aspect Lt = Lx^2 is used unless `Lt` is given.
    """

    def __init__(self, n, Nx, Nt, Lx=2 * np.pi, Lt=None):
        if int(n) != n or n < 1:
            raise error.UsageError("Invalid spatial dimension", details="n=%s" % n)

        for name, value in (("Nx", Nx), ("Nt", Nt)):
            if int(value) != value or value < 4 or value % 2:
                raise error.UsageError("Grid sizes must be even and at least 4", details="%s=%s" % (name, value))

        Lt = Lx ** 2 if Lt is None else Lt
        if Lx <= 0 or Lt <= 0:
            raise error.UsageError("Grid periods must be positive", details="Lx=%s Lt=%s" % (Lx, Lt))

        self.n = int(n)
        self.Nx = int(Nx)
        self.Nt = int(Nt)
        self.Lx = float(Lx)
        self.Lt = float(Lt)

    def __repr__(self):
        return "Grid(n=%d, Nx=%d, Nt=%d, Lx=%g, Lt=%g)" % self.key

    @property
    def key(self):
        return (self.n, self.Nx, self.Nt, self.Lx, self.Lt)

    def __eq__(self, other):
        return isinstance(other, Grid) and self.key == other.key

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash(self.key)

    @property
    def shape(self):
        return (self.Nx,) * self.n + (self.Nt,)

    @property
    def size(self):
        return self.Nx ** self.n * self.Nt

    @property
    def dx(self):
        return self.Lx / self.Nx

    @property
    def dt(self):
        return self.Lt / self.Nt

    @property
    def dV(self):
        return self.dx ** self.n * self.dt

    @property
    def volume(self):
        return self.Lx ** self.n * self.Lt

    @memoize_property("_axes_cache")
    def axes(self):
        """1-D frequency axes (xi, tau) in FFT order."""
        xi = 2 * np.pi * np.fft.fftfreq(self.Nx, d=self.dx)
        tau = 2 * np.pi * np.fft.fftfreq(self.Nt, d=self.dt)
        xi.setflags(write=False)
        tau.setflags(write=False)
        return xi, tau

    @memoize_property("_lattice_cache")
    def lattice(self):
        """Frequencies broadcast on the grid: xi of shape (n,) + shape, tau of shape `shape`."""
        xi1, tau1 = self.axes
        mesh = np.meshgrid(*([xi1] * self.n + [tau1]), indexing="ij")
        xi = np.stack(mesh[:-1])
        tau = mesh[-1]
        xi.setflags(write=False)
        tau.setflags(write=False)
        return xi, tau

    @property
    def xi(self):
        return self.lattice[0]

    @property
    def tau(self):
        return self.lattice[1]

    @memoize_property("_xi2_cache")
    def xi_norm2(self):
        return np.sum(self.xi ** 2, axis=0)

    @memoize_property("_coords_cache")
    def coordinates(self):
        """Physical coordinates (x of shape (n,) + shape, t of shape `shape`)."""
        x1 = np.arange(self.Nx) * self.dx
        t1 = np.arange(self.Nt) * self.dt
        mesh = np.meshgrid(*([x1] * self.n + [t1]), indexing="ij")
        return np.stack(mesh[:-1]), mesh[-1]

    def frequency(self, index):
        """(xi, tau) at a multi-index of the spectral table."""
        xi1, tau1 = self.axes
        return tuple(float(xi1[i]) for i in index[:-1]), float(tau1[index[-1]])

    def zero_index(self):
        return (0,) * (self.n + 1)

    def refine(self, factor=2):
        return Grid(self.n, self.Nx * factor, self.Nt * factor, self.Lx, self.Lt)


def _check_side(side):
    if side not in _SIDES:
        raise error.UsageError("Unknown field side", details=side)


class ScalarField(object):
    """
    Immutable complex table on a grid, either physical values or spectral
    coefficients.
    """

    def __init__(self, grid, values, side=PHYSICAL):
        _check_side(side)

        values = np.array(values, dtype=complex)
        if values.shape != grid.shape:
            raise error.UsageError("Field shape does not match grid", details="%s != %s" % (values.shape, grid.shape))

        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self.side = side

    def __repr__(self):
        return "ScalarField(%r, side=%s)" % (self.grid, self.side)

    @classmethod
    def zeros(cls, grid, side=PHYSICAL):
        return cls(grid, np.zeros(grid.shape), side)

    @classmethod
    def from_function(cls, grid, func):
        """Sample `func(x, t)` where x has shape (n,) + grid.shape."""
        x, t = grid.coordinates
        return cls(grid, np.broadcast_to(func(x, t), grid.shape))

    @classmethod
    def pure_mode(cls, grid, k, m, amplitude=1.):
        """amplitude * exp(i(xi.x + tau t)) with xi = 2 pi k / Lx and tau = 2 pi m / Lt."""
        k = np.asarray(k, dtype=float).reshape(grid.n, *([1] * (grid.n + 1)))
        xi = 2 * np.pi * k / grid.Lx
        tau = 2 * np.pi * m / grid.Lt
        return cls.from_function(grid, lambda x, t: amplitude * np.exp(1j * (np.sum(xi * x, axis=0) + tau * t)))

    @classmethod
    def random(cls, grid, rng, side=PHYSICAL, bandlimit=None):
        values = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        field = cls(grid, values, side)
        if bandlimit is None:
            return field

        return bandlimited(field.as_spectral(), bandlimit).as_side(side)

    def _compatible(self, other):
        if not isinstance(other, ScalarField) or other.grid != self.grid or other.side != self.side:
            raise error.UsageError("Fields are not on the same grid and side")

    def __add__(self, other):
        self._compatible(other)
        return ScalarField(self.grid, self.values + other.values, self.side)

    def __sub__(self, other):
        self._compatible(other)
        return ScalarField(self.grid, self.values - other.values, self.side)

    def __mul__(self, scalar):
        return ScalarField(self.grid, self.values * scalar, self.side)

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(self.grid, -self.values, self.side)

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.dV))

    def inner(self, other):
        """<self, other>, linear in the first slot."""
        self._compatible(other)
        return complex(np.vdot(other.values, self.values) * self.grid.dV)

    def as_spectral(self):
        return self if self.side == SPECTRAL else transform(self, "forward")

    def as_physical(self):
        return self if self.side == PHYSICAL else transform(self, "inverse")

    def as_side(self, side):
        return self.as_spectral() if side == SPECTRAL else self.as_physical()


class ConormalField(object):
    """
    C^{n+2}-valued field. Component 0 is the normal part, 1..n the spatial
    tangential part and n+1 the time part; 1..n+1 together form the r-block.
    """

    def __init__(self, grid, values, side=PHYSICAL):
        _check_side(side)

        values = np.array(values, dtype=complex)
        if values.shape != (grid.n + 2,) + grid.shape:
            raise error.UsageError("Conormal field shape does not match grid", details=str(values.shape))

        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self.side = side

    def __repr__(self):
        return "ConormalField(%r, side=%s)" % (self.grid, self.side)

    @classmethod
    def from_components(cls, perp, parallel, theta):
        grid, side = perp.grid, perp.side
        for f in list(parallel) + [theta]:
            perp._compatible(f)

        if len(parallel) != grid.n:
            raise error.UsageError("Expected %d tangential components" % grid.n)

        return cls(grid, np.stack([perp.values] + [f.values for f in parallel] + [theta.values]), side)

    @classmethod
    def zeros(cls, grid, side=PHYSICAL):
        return cls(grid, np.zeros((grid.n + 2,) + grid.shape), side)

    @property
    def ncomp(self):
        return self.grid.n + 2

    def component(self, i):
        return ScalarField(self.grid, self.values[i], self.side)

    @property
    def perp(self):
        return self.component(0)

    @property
    def parallel(self):
        return [self.component(i) for i in range(1, self.grid.n + 1)]

    @property
    def theta(self):
        return self.component(self.grid.n + 1)

    def _compatible(self, other):
        if not isinstance(other, ConormalField) or other.grid != self.grid or other.side != self.side:
            raise error.UsageError("Fields are not on the same grid and side")

    def __add__(self, other):
        self._compatible(other)
        return ConormalField(self.grid, self.values + other.values, self.side)

    def __sub__(self, other):
        self._compatible(other)
        return ConormalField(self.grid, self.values - other.values, self.side)

    def __mul__(self, scalar):
        return ConormalField(self.grid, self.values * scalar, self.side)

    __rmul__ = __mul__

    def __neg__(self):
        return ConormalField(self.grid, -self.values, self.side)

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.dV))

    def inner(self, other):
        self._compatible(other)
        return complex(np.vdot(other.values, self.values) * self.grid.dV)

    def as_spectral(self):
        if self.side == SPECTRAL:
            return self

        return ConormalField(self.grid, np.fft.fftn(self.values, axes=_axes(self.grid), norm="ortho"), SPECTRAL)

    def as_physical(self):
        if self.side == PHYSICAL:
            return self

        return ConormalField(self.grid, np.fft.ifftn(self.values, axes=_axes(self.grid), norm="ortho"), PHYSICAL)

    def as_side(self, side):
        return self.as_spectral() if side == SPECTRAL else self.as_physical()

    def compatibility_residual(self):
        """
        Relative defect of membership in the closure of ran(P).

        At nonzero frequencies the r-block must be parallel to
        w = (xi, sgn(tau)|tau|^(1/2)).
        """
        grid = self.grid
        coeffs = self.as_spectral().values
        xi, tau = grid.lattice
        rtau = np.sign(tau) * np.sqrt(np.abs(tau))
        par, theta = coeffs[1:grid.n + 1], coeffs[grid.n + 1]

        res = np.sum(np.abs(xi * theta - rtau * par) ** 2)
        for j in range(grid.n):
            for k in range(j + 1, grid.n):
                res += np.sum(np.abs(xi[k] * par[j] - xi[j] * par[k]) ** 2)

        weight = np.sqrt(grid.xi_norm2 + np.abs(tau))
        scale = np.sum((weight * np.abs(coeffs[1:])) ** 2)
        if scale == 0:
            return float(np.sqrt(res))

        return float(np.sqrt(res / scale))


class ParabolicSymbol(object):
    """
    Fourier multiplier given by a vectorized `evaluator(xi, tau)`.

    Powers use the principal branch, with the cut on (-inf, 0]. The value at
    the zero frequency is never evaluated and is `at_zero` instead.
    """

    def __init__(self, evaluator, at_zero=0., branch="principal", name=None):
        self.evaluator = evaluator
        self.at_zero = at_zero
        self.branch = branch
        self.name = name or getattr(evaluator, "__name__", "symbol")

    def __repr__(self):
        return "ParabolicSymbol(%s)" % self.name

    def evaluate(self, grid):
        xi, tau = grid.lattice
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            values = np.array(np.broadcast_to(self.evaluator(xi, tau), grid.shape), dtype=complex)

        zero = grid.zero_index()
        values[zero] = self.at_zero

        bad = ~np.isfinite(values)
        if bad.any():
            index = tuple(int(i) for i in np.argwhere(bad)[0])
            raise error.DomainError("Symbol %s is singular" % self.name, frequency=grid.frequency(index))

        return values


def parabolic_power(s, sign=1):
    """(|xi|^2 + sign i tau)^s on the principal branch."""
    def evaluator(xi, tau):
        return (np.sum(xi ** 2, axis=0) + sign * 1j * tau) ** s

    return ParabolicSymbol(evaluator, at_zero=1. if s == 0 else 0., name="parabolic_power(%g,%+d)" % (s, sign))


def _axes(grid):
    return tuple(range(-grid.n - 1, 0))


def transform(field, direction):
    """Unitary FFT; `forward` maps physical values to spectral coefficients."""
    if direction == "forward":
        if field.side != PHYSICAL:
            raise error.UsageError("Forward transform expects a physical field")

        return ScalarField(field.grid, np.fft.fftn(field.values, norm="ortho"), SPECTRAL)

    elif direction == "inverse":
        if field.side != SPECTRAL:
            raise error.UsageError("Inverse transform expects a spectral field")

        return ScalarField(field.grid, np.fft.ifftn(field.values, norm="ortho"), PHYSICAL)

    raise error.UsageError("Unknown transform direction", details=direction)


def apply_symbol(symbol, field):
    """Multiply the spectral coefficients by `symbol`; the result is on the input side."""
    values = symbol.evaluate(field.grid)
    out = ScalarField(field.grid, field.as_spectral().values * values, SPECTRAL)
    return out.as_side(field.side)


def bandlimited(field, kmax):
    """Zero every coefficient whose integer frequency exceeds `kmax` on some axis."""
    grid = field.grid
    coeffs = np.array(field.as_spectral().values)
    kx = np.abs(np.fft.fftfreq(grid.Nx, 1. / grid.Nx))
    kt = np.abs(np.fft.fftfreq(grid.Nt, 1. / grid.Nt))
    mesh = np.meshgrid(*([kx] * grid.n + [kt]), indexing="ij")
    mask = np.all([m <= kmax for m in mesh], axis=0)
    return ScalarField(grid, coeffs * mask, SPECTRAL).as_side(field.side)


def resample(field, grid):
    """
    Spectral interpolation of a band-limited field onto a finer grid with the
    same periods.
    """
    old = field.grid
    if (old.n, old.Lx, old.Lt) != (grid.n, grid.Lx, grid.Lt) or grid.Nx < old.Nx or grid.Nt < old.Nt:
        raise error.UsageError("Resampling needs a refinement of the same torus", details="%r -> %r" % (old, grid))

    src = field.as_spectral().values
    index = []
    for axis in range(old.n + 1):
        nold, nnew = (old.Nx, grid.Nx) if axis < old.n else (old.Nt, grid.Nt)
        k = np.fft.fftfreq(nold, 1. / nold).astype(int)
        index.append(np.mod(k, nnew))

    dest = np.zeros(grid.shape, dtype=complex)
    dest[np.ix_(*index)] = src * np.sqrt(grid.size / old.size)
    return ScalarField(grid, dest, SPECTRAL).as_side(field.side)


def parabolic_sobolev_norm(field, s, sign="+"):
    """
    Homogeneous norm ||F^-1 (|xi|^2 +- i tau)^s F v||_2.

    The zero mode is dropped for s < 0 and carried for s = 0.
    """
    if not -1 <= s <= 1:
        raise error.UsageError("Sobolev order out of range", details="s=%g" % s)

    if sign not in ("+", "-"):
        raise error.UsageError("Unknown sign convention", details=sign)

    weighted = apply_symbol(parabolic_power(s, 1 if sign == "+" else -1), field.as_spectral())
    return weighted.norm()


def geometric_nodes(lambda_min=1e-3, ratio=2 ** 0.25, lambda_max=1e2, minimum=16):
    """lambda_j = lambda_min ratio^j up to lambda_max, at least `minimum` of them."""
    if not 0 < lambda_min < lambda_max or ratio <= 1:
        raise error.UsageError("Invalid node range", details="[%g, %g] ratio %g" % (lambda_min, lambda_max, ratio))

    count = int(np.floor(np.log(lambda_max / lambda_min) / np.log(ratio) + 1e-9)) + 1
    if count < minimum:
        raise error.UsageError("Too few transversal nodes", details="%d < %d" % (count, minimum))

    return lambda_min * ratio ** np.arange(count)


class TransversalProfile(object):
    """
    Fields sampled at transversal nodes lambda_j.

    Nodes are all positive (upper half-space) or all negative (lower), with
    strictly increasing modulus. `dlambda` optionally carries the exact
    lambda-derivative at each node.
    """

    def __init__(self, nodes, fields, dlambda=None):
        nodes = np.array(nodes, dtype=float)
        fields = list(fields)

        if nodes.ndim != 1 or len(nodes) < 2:
            raise error.UsageError("A profile needs at least 2 transversal nodes")

        if len(fields) != len(nodes):
            raise error.UsageError("Profile node and field counts differ", details="%d != %d" % (len(nodes), len(fields)))

        if not (np.all(nodes > 0) or np.all(nodes < 0)) or np.any(np.diff(np.abs(nodes)) <= 0):
            raise error.UsageError("Profile nodes must have one sign and strictly increasing modulus")

        kind, grid = type(fields[0]), fields[0].grid
        if any(type(f) is not kind or f.grid != grid for f in fields):
            raise error.UsageError("Profile fields must share type and grid")

        if dlambda is not None and len(dlambda) != len(nodes):
            raise error.UsageError("Derivative count does not match node count")

        nodes.setflags(write=False)
        self.nodes = nodes
        self.fields = fields
        self.dlambda = list(dlambda) if dlambda is not None else None
        self.grid = grid

    def __len__(self):
        return len(self.nodes)

    def __getitem__(self, i):
        return self.fields[i]

    @property
    def half_space(self):
        return "upper" if self.nodes[0] > 0 else "lower"

    @property
    def is_conormal(self):
        return isinstance(self.fields[0], ConormalField)

    def stack(self, side=SPECTRAL):
        return np.stack([f.as_side(side).values for f in self.fields])

    def derivative_stack(self, side=SPECTRAL):
        """d/dlambda at the nodes, exact when available, otherwise finite differences."""
        if self.dlambda is not None:
            return np.stack([f.as_side(side).values for f in self.dlambda])

        return np.gradient(self.stack(side), self.nodes, axis=0)

    def map(self, func):
        dl = [func(f) for f in self.dlambda] if self.dlambda is not None else None
        return TransversalProfile(self.nodes, [func(f) for f in self.fields], dl)

    def __sub__(self, other):
        if not np.array_equal(self.nodes, other.nodes):
            raise error.UsageError("Profiles have different nodes")

        return TransversalProfile(self.nodes, [a - b for a, b in zip(self.fields, other.fields)])


def energy_norm(u_profile):
    """
    (||grad_{lambda,x} u||^2 + ||H D^(1/2) u||^2)^(1/2) over the slab spanned
    by the profile nodes.
    """
    if len(u_profile) < 2:
        raise error.UsageError("Energy norm needs at least 2 transversal nodes")

    if u_profile.is_conormal:
        raise error.UsageError("Energy norm expects a scalar profile")

    grid = u_profile.grid
    coeffs = u_profile.stack(SPECTRAL)
    dl = u_profile.derivative_stack(SPECTRAL)
    weight = grid.xi_norm2 + np.abs(grid.tau)

    density = (np.sum(np.abs(dl) ** 2, axis=tuple(range(1, dl.ndim)))
               + np.sum(weight * np.abs(coeffs) ** 2, axis=tuple(range(1, coeffs.ndim)))) * grid.dV

    return float(np.sqrt(abs(integrate.trapezoid(density, np.abs(u_profile.nodes)))))


def _side_code(side):
    return _SIDES.index(side)


def write_snapshot(stream, field):
    """Binary dump: 32-byte header then little-endian complex128 values."""
    grid = field.grid
    ncomp = field.ncomp if isinstance(field, ConormalField) else 1
    stream.write(_HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, grid.n, grid.Nx, grid.Nt, _side_code(field.side), ncomp))
    stream.write(np.ascontiguousarray(field.values, dtype="<c16").tobytes())


def read_snapshot(stream, Lx=2 * np.pi, Lt=None):
    """
    Read a field written by `write_snapshot`. Periods are not part of the
    format and are supplied by the caller.
    """
    header = stream.read(_HEADER.size)
    if len(header) != _HEADER.size:
        raise error.UsageError("Truncated snapshot header")

    magic, version, n, nx, nt, side, ncomp = _HEADER.unpack(header)
    if magic != SNAPSHOT_MAGIC or version != SNAPSHOT_VERSION:
        raise error.UsageError("Not a snapshot", details="magic=%r version=%d" % (magic, version))

    grid = Grid(n, nx, nt, Lx, Lt)
    count = ncomp * grid.size
    raw = stream.read(16 * count)
    if len(raw) != 16 * count:
        raise error.UsageError("Truncated snapshot data")

    data = np.frombuffer(raw, dtype="<c16")

    side = _SIDES[side]
    if ncomp == 1:
        return ScalarField(grid, data.reshape(grid.shape), side)

    if ncomp != n + 2:
        raise error.UsageError("Unexpected component count", details=str(ncomp))

    return ConormalField(grid, data.reshape((ncomp,) + grid.shape), side)


def write_profile(stream, profile):
    stream.write(struct.pack("<I", len(profile)))
    stream.write(np.ascontiguousarray(profile.nodes, dtype="<f8").tobytes())
    for field in profile.fields:
        write_snapshot(stream, field)


def read_profile(stream, Lx=2 * np.pi, Lt=None):
    raw = stream.read(4)
    if len(raw) != 4:
        raise error.UsageError("Truncated profile")

    count, = struct.unpack("<I", raw)
    raw = stream.read(8 * count)
    if len(raw) != 8 * count:
        raise error.UsageError("Truncated profile node table")

    nodes = np.frombuffer(raw, dtype="<f8")

    return TransversalProfile(nodes, [read_snapshot(stream, Lx, Lt) for i in range(count)])
