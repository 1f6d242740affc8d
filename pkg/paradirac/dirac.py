# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

"""
Per-frequency Dirac calculus.

Vectors in C^(n+2) are ordered (perp, par_1 .. par_n, theta); the r-block is
(par_1 .. par_n, theta). Every per-frequency quantity is stored as an array
of shape grid.shape + (d, d) with d = n + 2.
"""

import numpy as np
import scipy.linalg

from paradirac import error, log
from paradirac.spectral import SPECTRAL, ConormalField, ScalarField, write_snapshot
from paradirac.utils.cache import memoize, memoize_property


logger = log.get_logger(__name__)

KERNEL_TOL = 1e-8
EIGVEC_COND_MAX = 1e8
BASIS_COND_MAX = 1e12
SECTOR_TOL = 1e-12
PIVOT_COND_MAX = 1e12

_TAGS = ("block", "upper-triangular", "lower-triangular", "hermitian", "constant", "general")
_OPERANDS = ("pm", "mp", "p")


class CoefficientMatrix(object):
    """
    Elliptic (n+1)x(n+1) coefficients, constant or sampled on a grid.

    `entries` has shape (n+1, n+1) or grid.shape + (n+1, n+1). kappa is the
    minimum eigenvalue of the Hermitian part and Cbound the maximal operator
    norm over all samples. Declared constants and tags are verified.
    """

    def __init__(self, entries, kappa=None, Cbound=None, tags=()):
        entries = np.array(entries, dtype=complex)
        if entries.ndim < 2 or entries.shape[-1] != entries.shape[-2] or entries.shape[-1] < 2:
            raise error.UsageError("Coefficients must be square matrices of size n+1 >= 2", details=str(entries.shape))

        entries.setflags(write=False)
        self.entries = entries
        self.n = entries.shape[-1] - 1

        herm = (entries + np.swapaxes(entries.conj(), -1, -2)) / 2
        kmin = float(np.min(np.linalg.eigvalsh(herm)))
        cmax = float(np.max(np.linalg.norm(entries, ord=2, axis=(-2, -1))))
        if kmin <= 0:
            raise error.DomainError("Coefficients are not elliptic", details="min Re eigenvalue %.3e" % kmin)

        if kappa is not None and kappa > kmin * (1 + 1e-12):
            raise error.DomainError("Declared ellipticity constant too large", details="%g > %g" % (kappa, kmin))

        if Cbound is not None and Cbound < cmax * (1 - 1e-12):
            raise error.DomainError("Declared bound too small", details="%g < %g" % (Cbound, cmax))

        self.kappa = kmin if kappa is None else float(kappa)
        self.Cbound = cmax if Cbound is None else float(Cbound)

        for tag in tags:
            if tag not in _TAGS:
                raise error.UsageError("Unknown structure tag", details=tag)

            if not self.has_structure(tag):
                raise error.DomainError("Coefficients do not have the declared structure", details=tag)

        self.tags = tuple(tags)

    def __repr__(self):
        return "CoefficientMatrix(n=%d, kappa=%.3g, C=%.3g, tags=%s)" % (self.n, self.kappa, self.Cbound, ",".join(self.tags) or "-")

    def __json__(self):
        return {"n": self.n, "kappa": self.kappa, "C": self.Cbound, "tags": list(self.tags), "constant": self.is_constant}

    @property
    def is_constant(self):
        return self.entries.ndim == 2

    @property
    def perp_perp(self):
        return self.entries[..., 0, 0]

    @property
    def perp_par(self):
        return self.entries[..., 0, 1:]

    @property
    def par_perp(self):
        return self.entries[..., 1:, 0]

    @property
    def par_par(self):
        return self.entries[..., 1:, 1:]

    def has_structure(self, tag):
        tol = 1e-14 * max(1., float(np.max(np.abs(self.entries))))
        zero = lambda a: bool(np.all(np.abs(a) <= tol))  # noqa: E731

        if tag == "block":
            return zero(self.perp_par) and zero(self.par_perp)
        elif tag == "upper-triangular":
            return zero(self.par_perp)
        elif tag == "lower-triangular":
            return zero(self.perp_par)
        elif tag == "hermitian":
            return zero(self.entries - np.swapaxes(self.entries.conj(), -1, -2))
        elif tag == "constant":
            return self.is_constant

        return True

    def structure(self):
        return tuple(tag for tag in _TAGS[:-1] if self.has_structure(tag)) or ("general",)

    def constant_value(self):
        if not self.is_constant:
            raise error.UsageError("Spectral calculus requires constant coefficients")

        return self.entries

    def adjoint(self):
        return CoefficientMatrix(np.swapaxes(self.entries.conj(), -1, -2))

    def __sub__(self, other):
        return self.entries - other.entries

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n + 1), tags=("block", "hermitian", "constant"))

    @classmethod
    def diagonal(cls, values):
        return cls(np.diag(values))

    @classmethod
    def interpolate(cls, a0, a1, theta):
        return cls((1 - theta) * a0.entries + theta * a1.entries)

    @classmethod
    def random_elliptic(cls, n, rng, hermitian=False, structure="general", skew=1.5, shape=None, cells=None):
        """
        Random coefficients with Hermitian part of spectrum in [1, 2] and, unless
        hermitian, a skew part of norm <= skew.

        With `shape` (a grid shape) independent matrices are drawn per cell of a
        `cells`-per-axis partition and repeated to the full shape, so that the
        same field is obtained on any refinement of the partition.
        """
        if structure not in ("general", "block", "upper-triangular", "lower-triangular"):
            raise error.UsageError("Unknown random structure", details=structure)

        if shape is None:
            tags = ("constant",) if structure == "general" else ("constant", structure)
            return cls(_random_matrix(n, rng, hermitian, structure, skew), tags=tags)

        cells = cells or shape[0]
        if any(s % cells for s in shape):
            raise error.UsageError("Grid shape must be a multiple of the cell count", details="%s / %d" % (shape, cells))

        coarse = np.empty((cells,) * len(shape) + (n + 1, n + 1), dtype=complex)
        for index in np.ndindex(*coarse.shape[:-2]):
            coarse[index] = _random_matrix(n, rng, hermitian, structure, skew)

        for axis, size in enumerate(shape):
            coarse = np.repeat(coarse, size // cells, axis=axis)

        return cls(coarse)


def _random_hermitian(size, rng, low, high):
    q, _ = np.linalg.qr(rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size)))
    return (q * rng.uniform(low, high, size)) @ q.conj().T


def _random_matrix(n, rng, hermitian, structure, skew):
    d = n + 1
    if structure == "general":
        herm = _random_hermitian(d, rng, 1., 2.)
        anti = _random_hermitian(d, rng, -skew, skew)
        return herm if hermitian else herm + 1j * anti

    a = np.zeros((d, d), dtype=complex)
    a[0, 0] = rng.uniform(1., 2.) + (0 if hermitian else 1j * rng.uniform(-skew, skew))
    a[1:, 1:] = _random_hermitian(n, rng, 1., 2.)
    if not hermitian:
        a[1:, 1:] += 1j * _random_hermitian(n, rng, -skew, skew)

    off = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    off *= rng.uniform(0., 0.5) / np.linalg.norm(off)
    if structure == "upper-triangular":
        a[0, 1:] = off
    elif structure == "lower-triangular":
        a[1:, 0] = off

    return a


def hat_transform(A):
    """
    A -> [[1/a, -b/a], [c/a, d - c b/a]] for A = [[a, b], [c, d]], pointwise.

    The pivot a is singular when its condition ||A||_2 / |a| exceeds
    PIVOT_COND_MAX at some sample.
    """
    e = A.entries
    a = e[..., 0, 0]
    with np.errstate(divide="ignore"):
        cond = np.linalg.norm(e, ord=2, axis=(-2, -1)) / np.abs(a)

    if not np.all(cond <= PIVOT_COND_MAX):
        raise error.DomainError("Normal-normal coefficient numerically singular", details="condition %.3e" % np.max(cond))

    out = np.empty_like(e)
    b, c, d = e[..., 0, 1:], e[..., 1:, 0], e[..., 1:, 1:]
    out[..., 0, 0] = 1. / a
    out[..., 0, 1:] = -b / a[..., None]
    out[..., 1:, 0] = c / a[..., None]
    out[..., 1:, 1:] = d - c[..., :, None] * b[..., None, :] / a[..., None, None]

    return CoefficientMatrix(out, tags=[t for t in A.tags if t in ("block", "upper-triangular", "lower-triangular", "constant")])


def sign_matrix(n):
    """N = diag(-1, Id, 1)."""
    return np.diag([-1.] + [1.] * (n + 1)).astype(complex)


def coefficient_multiplier(A):
    """
    m = [[A^ perp-perp, A^ perp-par, 0], [A^ par-perp, A^ par-par, 0], [0, 0, 1]],
    together with N and m~ = N m* N.
    """
    if not A.is_constant:
        raise error.UsageError("Non-constant coefficients cannot enter the spectral path")

    d = A.n + 2
    m = np.eye(d, dtype=complex)
    m[:-1, :-1] = hat_transform(A).entries
    N = sign_matrix(A.n)
    return m, N, N @ m.conj().T @ N


def dirac_symbol(grid):
    """
    p(xi, tau): perp row (0, i xi, -|tau|^(1/2)), par rows -i xi in the perp
    column, theta row -i sgn(tau)|tau|^(1/2) in the perp column.
    """
    xi, tau = grid.lattice
    n = grid.n
    r = np.sqrt(np.abs(tau))
    p = np.zeros(grid.shape + (n + 2, n + 2), dtype=complex)
    for j in range(n):
        p[..., 0, 1 + j] = 1j * xi[j]
        p[..., 1 + j, 0] = -1j * xi[j]

    p[..., 0, n + 1] = -r
    p[..., n + 1, 0] = -1j * np.sign(tau) * r
    p.setflags(write=False)
    return p


def adjoint_symbol(grid):
    """Symbol of P* = [[0, div, H D^(1/2)], [-grad, 0, 0], [-D^(1/2), 0, 0]]."""
    xi, tau = grid.lattice
    n = grid.n
    r = np.sqrt(np.abs(tau))
    q = np.zeros(grid.shape + (n + 2, n + 2), dtype=complex)
    for j in range(n):
        q[..., 0, 1 + j] = 1j * xi[j]
        q[..., 1 + j, 0] = -1j * xi[j]

    q[..., 0, n + 1] = 1j * np.sign(tau) * r
    q[..., n + 1, 0] = -r
    return q


def conormal_anticommutator(grid):
    """P* N + N P: only (perp, theta) = (1 + i sgn tau)|tau|^(1/2) and (theta, perp) = (1 - i sgn tau)|tau|^(1/2)."""
    N = sign_matrix(grid.n)
    return adjoint_symbol(grid) @ N + N @ dirac_symbol(grid)


def reduced_direction(grid, backward=False):
    """
    w = (xi, sgn(tau)|tau|^(1/2)) (forward) or (xi, -i|tau|^(1/2)) (backward),
    the direction of the r-block of ran(p), with |w|^2 = |xi|^2 + |tau|.
    Returns (w of shape grid.shape + (n+1,), |w|).
    """
    xi, tau = grid.lattice
    r = np.sqrt(np.abs(tau))
    last = -1j * r if backward else np.sign(tau) * r
    w = np.concatenate([np.moveaxis(xi, 0, -1), last[..., None]], axis=-1).astype(complex)
    return w, np.sqrt(grid.xi_norm2 + np.abs(tau))


class HolomorphicFunction(object):
    """
    Function on the double sector, given by a vectorized evaluator on nonzero
    points and its value `at_zero` on the kernel.
    """

    def __init__(self, name, evaluator, at_zero=0.):
        self.name = name
        self.evaluator = evaluator
        self.at_zero = at_zero

    def __repr__(self):
        return "HolomorphicFunction(%s)" % self.name

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z.real) <= SECTOR_TOL * np.abs(z)):
            raise error.ConditioningError("%s evaluated on the imaginary axis" % self.name)

        return self.evaluator(z)


def _sgn(z):
    return np.sign(z.real)


def _bracket(z):
    return z * _sgn(z)


one = HolomorphicFunction("one", lambda z: np.ones_like(z), 1.)
identity = HolomorphicFunction("identity", lambda z: z, 0.)
chi_plus = HolomorphicFunction("chi+", lambda z: (z.real > 0).astype(complex), 0.)
chi_minus = HolomorphicFunction("chi-", lambda z: (z.real < 0).astype(complex), 0.)
sgn = HolomorphicFunction("sgn", lambda z: _sgn(z).astype(complex), 0.)
ran_projector = HolomorphicFunction("pi_ran", lambda z: np.ones_like(z), 0.)


def exp_decay(mu):
    """e^(-mu [z]); equals 1 on the kernel."""
    return HolomorphicFunction("exp(-%g[z])" % mu, lambda z: np.exp(-mu * _bracket(z)), 1.)


def bracket_power(s):
    """[z]^s with [z] = z sgn(Re z); 0 on the kernel."""
    return HolomorphicFunction("[z]^%g" % s, lambda z: _bracket(z) ** s, 0.)


def resolvent_function(lam):
    return HolomorphicFunction("(1+i%gz)^-1" % lam, lambda z: 1. / (1 + 1j * lam * z), 1.)


def square_weight(lam):
    """lambda [z] e^(-lambda [z]), the square function integrand."""
    return HolomorphicFunction("%g[z]exp(-%g[z])" % (lam, lam), lambda z: lam * _bracket(z) * np.exp(-lam * _bracket(z)), 0.)


def cauchy(mu, side="upper"):
    """e^(-mu [z]) chi(z) with chi = chi+ (upper) or chi- (lower); mu >= 0."""
    sign = 1 if side == "upper" else -1
    return HolomorphicFunction("exp(-%g[z])chi%s" % (mu, "+" if sign > 0 else "-"),
                               lambda z: np.exp(-mu * _bracket(z)) * (sign * z.real > 0), 0.)


class DiracSymbolFamily(object):
    """
    p, m, pm and mp at every lattice frequency of `grid`.

    The backward family (for the adjoint equation) uses p* and m~ = N m* N.
    Eigendecompositions are computed once per operand and cached.
    """

    def __init__(self, grid, A=None, backward=False):
        self.grid = grid
        self.A = A if A is not None else CoefficientMatrix.identity(grid.n)
        if self.A.n != grid.n:
            raise error.UsageError("Coefficient dimension does not match grid", details="%d != %d" % (self.A.n, grid.n))

        m, N, mtilde = coefficient_multiplier(self.A)
        p = dirac_symbol(grid)

        self.backward = backward
        self.N = N
        self.m = mtilde if backward else m
        self.p = np.swapaxes(p.conj(), -1, -2) if backward else p
        self.d = grid.n + 2

    def __repr__(self):
        return "DiracSymbolFamily(%r, %r%s)" % (self.grid, self.A, ", backward" if self.backward else "")

    def adjoint_family(self):
        return DiracSymbolFamily(self.grid, self.A, backward=not self.backward)

    @memoize_property("_pm_cache")
    def pm(self):
        return self.p @ self.m

    @memoize_property("_mp_cache")
    def mp(self):
        return self.m @ self.p

    @memoize_property("_pinv_cache")
    def p_pinv(self):
        """Moore-Penrose inverse of p; it inverts p on ran(p) up to the kernel part."""
        return np.linalg.pinv(self.p, rcond=KERNEL_TOL)

    def operand(self, name):
        if name not in _OPERANDS:
            raise error.UsageError("Unknown operand", details=name)

        return getattr(self, name)

    def frequency(self, flat_index):
        return self.grid.frequency(np.unravel_index(flat_index, self.grid.shape))

    @memoize("_eig_cache")
    def eig(self, name):
        """
        Batched eigendecomposition of an operand.

        Returns (w, V, Vinv, kernel, fallback) with flattened frequency axis;
        `fallback` lists the frequencies whose eigenvector matrix is too ill
        conditioned to be used.
        """
        mats = self.operand(name).reshape(-1, self.d, self.d)
        w, V = np.linalg.eig(mats)

        scale = np.max(np.abs(mats), axis=(-2, -1))
        kernel = np.abs(w) <= KERNEL_TOL * np.maximum(scale, np.finfo(float).tiny)[:, None]
        zero = scale == 0
        V[zero] = np.eye(self.d)

        cond = np.linalg.cond(V)
        fallback = np.flatnonzero(~np.isfinite(cond) | (cond > EIGVEC_COND_MAX))
        Vinv = np.zeros_like(V)
        good = np.setdiff1d(np.arange(len(V)), fallback)
        Vinv[good] = np.linalg.inv(V[good])

        if len(fallback):
            logger.warning("%s: %d frequencies use the Schur-Parlett fallback", name, len(fallback))

        return w, V, Vinv, kernel, fallback

    def _range_basis(self, name, index):
        p = self.p.reshape(-1, self.d, self.d)[index]
        u, s, vh = np.linalg.svd(p)
        q = u[:, :2]
        if name == "mp":
            q, _ = np.linalg.qr(self.m @ q)

        return q

    def _fallback(self, name, b, index):
        mat = self.operand(name).reshape(-1, self.d, self.d)[index]
        freq = self.frequency(index)

        q = self._range_basis(name, index)
        scale = max(np.max(np.abs(mat)), np.finfo(float).tiny)
        null = scipy.linalg.null_space(mat, rcond=KERNEL_TOL * scale / max(np.linalg.norm(mat, 2), scale))
        if null.shape[1] != self.d - 2:
            raise error.ConditioningError("Kernel dimension is %d instead of %d" % (null.shape[1], self.d - 2), frequency=freq)

        basis = np.hstack([q, null])
        if np.linalg.cond(basis) > BASIS_COND_MAX:
            raise error.ConditioningError("Range and kernel bases are degenerate", frequency=freq)

        binv = np.linalg.inv(basis)
        block = (binv @ mat @ basis)[:2, :2]

        def func(z):
            return b(z)

        fb = np.zeros((self.d, self.d), dtype=complex)
        fb[:2, :2] = scipy.linalg.funm(block, func)
        fb[2:, 2:] = b.at_zero * np.eye(self.d - 2)
        return basis @ fb @ binv

    def matrix_function(self, b, name="pm"):
        """
        b(operand) at every frequency: V diag(b(w)) V^-1, with b.at_zero on the
        kernel and a Schur-Parlett evaluation in a range/kernel basis where V is
        ill conditioned.
        """
        w, V, Vinv, kernel, fallback = self.eig(name)

        values = np.empty_like(w)
        values[kernel] = b.at_zero
        nz = ~kernel
        if nz.any():
            try:
                values[nz] = b(w[nz])
            except error.ConditioningError:
                bad = np.flatnonzero(np.any(nz & (np.abs(w.real) <= SECTOR_TOL * np.abs(w)), axis=1))[0]
                raise error.ConditioningError("%s evaluated on the imaginary axis" % b.name, frequency=self.frequency(bad))

        out = np.einsum("fij,fj,fjk->fik", V, values, Vinv)
        for index in fallback:
            out[index] = self._fallback(name, b, index)

        return out.reshape(self.grid.shape + (self.d, self.d))

    def resolvent(self, lam):
        """(Id + i lam pm)^-1 at every frequency."""
        mats = np.eye(self.d) + 1j * lam * self.pm
        flat = mats.reshape(-1, self.d, self.d)
        cond = np.linalg.cond(flat)
        bad = np.flatnonzero(~np.isfinite(cond) | (cond > BASIS_COND_MAX))
        if len(bad):
            raise error.ConditioningError("Resolvent is numerically singular", frequency=self.frequency(bad[0]))

        return np.linalg.inv(mats)

    def resolvent_bound(self, lambdas):
        """sup over lambdas and frequencies of ||(Id + i lam pm)^-1||."""
        return max(float(np.max(np.linalg.norm(self.resolvent(lam), ord=2, axis=(-2, -1)))) for lam in lambdas)

    def intertwining_residual(self, b=sgn):
        """max ||p b(mp) - b(pm) p|| over frequencies, relative to max ||p||."""
        lhs = self.p @ self.matrix_function(b, "mp")
        rhs = self.matrix_function(b, "pm") @ self.p
        scale = max(float(np.max(np.abs(self.p))), np.finfo(float).tiny)
        return float(np.max(np.abs(lhs - rhs)) / scale)

    def similarity_residuals(self):
        """
        Residual of mp = m pm m^-1 and the Hausdorff distance between the
        spectra of mp and pm, both relative to the largest entry or eigenvalue.
        """
        conjugated = self.m @ self.pm @ np.linalg.inv(self.m)
        similarity = float(np.max(np.abs(conjugated - self.mp)) / max(float(np.max(np.abs(self.mp))), np.finfo(float).tiny))

        w_mp = self.eig("mp")[0]
        w_pm = self.eig("pm")[0]
        gap = np.abs(w_mp[:, :, None] - w_pm[:, None, :])
        distance = max(float(np.max(np.min(gap, axis=2))), float(np.max(np.min(gap, axis=1))))
        scale = max(float(np.max(np.abs(w_pm))), np.finfo(float).tiny)
        return {"similarity": similarity, "spectra": distance / scale}

    def sector_angle(self, name="pm"):
        """Largest |arg| of the nonzero spectrum folded into the right half-plane."""
        w, V, Vinv, kernel, fallback = self.eig(name)
        z = w[~kernel]
        if not z.size:
            return 0.

        return float(np.max(np.arctan2(np.abs(z.imag), np.abs(z.real))))

    @memoize_property("_projector_cache")
    def projectors(self):
        return spectral_projectors(self)

    def spectral_residuals(self):
        return self.projectors.algebra_residuals()


def matrix_function(fam, b, operand="pm"):
    return fam.matrix_function(b, operand)


class SpectralProjectorSet(object):
    """
    chi+, chi-, pi_ran and sgn of pm, with the 2x2 block form of sgn:
    s_pp (scalar), s_pr (row), s_rp (column), s_rr ((n+1)x(n+1)).
    """

    def __init__(self, chi_plus, chi_minus, pi_ran):
        self.chi_plus = chi_plus
        self.chi_minus = chi_minus
        self.pi_ran = pi_ran
        self.sgn = chi_plus - chi_minus

    @property
    def s_pp(self):
        return self.sgn[..., 0, 0]

    @property
    def s_pr(self):
        return self.sgn[..., 0, 1:]

    @property
    def s_rp(self):
        return self.sgn[..., 1:, 0]

    @property
    def s_rr(self):
        return self.sgn[..., 1:, 1:]

    def chi(self, side):
        return self.chi_plus if side == "upper" else self.chi_minus

    def algebra_residuals(self):
        def res(a):
            return float(np.max(np.abs(a))) if a.size else 0.

        cp, cm, pi, s = self.chi_plus, self.chi_minus, self.pi_ran, self.sgn
        return {
            "sum": res(cp + cm - pi),
            "chi+ idempotent": res(cp @ cp - cp),
            "chi- idempotent": res(cm @ cm - cm),
            "chi+ chi-": res(cp @ cm),
            "sgn^2": res(s @ s - pi)
        }


def spectral_projectors(fam):
    return SpectralProjectorSet(fam.matrix_function(chi_plus), fam.matrix_function(chi_minus), fam.matrix_function(ran_projector))


def apply_matrices(mats, field):
    """Apply per-frequency matrices to a conormal field (result on the spectral side)."""
    coeffs = np.moveaxis(field.as_spectral().values, 0, -1)
    out = np.einsum("...ij,...j->...i", mats, coeffs)
    return ConormalField(field.grid, np.moveaxis(out, -1, 0), SPECTRAL)


def sobolev_scale_norm(h, s, fam, operator="PM", tol=1e-8):
    """||[op]^s h||_2 with op = P or PM, computed per mode; [z]^s is 0 on the kernel."""
    if not -1 <= s <= 0:
        raise error.UsageError("Sobolev order out of range", details="s=%g" % s)

    if operator not in ("P", "PM"):
        raise error.UsageError("Unknown operator", details=operator)

    residual = h.compatibility_residual()
    if residual > tol:
        raise error.DomainError("Datum is not in the closure of ran(P)", residual=residual, details="residual %.3e" % residual)

    mats = fam.matrix_function(bracket_power(s), "p" if operator == "P" else "pm")
    return apply_matrices(mats, h).norm()


def lipschitz_slope(A0, A1, grid, samples=8, b=sgn):
    """
    Largest ratio ||b(pm_A) - b(pm_A')||_max / ||A - A'||_max along the
    segment between A0 and A1.
    """
    thetas = np.linspace(0., 1., samples + 1)
    coeffs = [CoefficientMatrix.interpolate(A0, A1, th) for th in thetas]
    values = [DiracSymbolFamily(grid, A).matrix_function(b) for A in coeffs]

    slope = 0.
    for k in range(samples):
        da = float(np.max(np.linalg.norm(coeffs[k + 1] - coeffs[k], ord=2, axis=(-2, -1))))
        db = float(np.max(np.linalg.norm(values[k + 1] - values[k], ord=2, axis=(-2, -1))))
        if da > 0:
            slope = max(slope, db / da)

    return slope


def structural_wellposedness(A, s):
    """
    Problems expected to be well-posed at regularity s from the structure of A.

    Returns a subset of {"R", "N"}: "R" when the data are the r part (regularity
    problem), "N" when they are the perp part (Neumann problem).
    """
    if not -1 <= s <= 0:
        raise error.UsageError("Sobolev order out of range", details="s=%g" % s)

    if s == -0.5 or A.is_constant or A.has_structure("block"):
        return {"R", "N"}

    if A.has_structure("upper-triangular"):
        return {"R"} if s > -0.5 else {"N"}

    if A.has_structure("lower-triangular"):
        return {"N"} if s > -0.5 else {"R"}

    return set()


def dump_symbol_family(stream, fam, operand="pm"):
    """One spectral snapshot per matrix entry of `operand`, row major."""
    mats = fam.operand(operand)
    for i in range(fam.d):
        for j in range(fam.d):
            write_snapshot(stream, ScalarField(fam.grid, mats[..., i, j], SPECTRAL))
