# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

"""
Energy solutions on a truncated slab [0, Lambda] x torus.

The lambda-axis carries P1 elements on uniform nodes with midpoint
quadrature, (x, t) are treated spectrally and the coefficients act pointwise
in (x, t). The node at lambda = Lambda is a homogeneous Dirichlet cap.
"""

import collections

import numpy as np
import scipy.sparse.linalg
from scipy import integrate

from paradirac import dirac, error, log
from paradirac.spectral import PHYSICAL, ScalarField, TransversalProfile


logger = log.get_logger(__name__)

WEAK_RESIDUAL_TOL = 1e-9


class DiscreteSlab(object):
    def __init__(self, grid, Lambda=8., Nlambda=64):
        if Nlambda < 8:
            raise error.UsageError("The slab needs at least 8 transversal cells", details="Nlambda=%d" % Nlambda)

        if Lambda < 1:
            raise error.UsageError("The slab must have height at least 1", details="Lambda=%g" % Lambda)

        self.grid = grid
        self.Lambda = float(Lambda)
        self.Nlambda = int(Nlambda)
        self.nodes = np.linspace(0., self.Lambda, self.Nlambda + 1)
        self.h = self.Lambda / self.Nlambda

    def __repr__(self):
        return "DiscreteSlab(%r, Lambda=%g, Nlambda=%d)" % (self.grid, self.Lambda, self.Nlambda)

    @property
    def shape(self):
        return (self.Nlambda + 1,) + self.grid.shape

    def zeros(self):
        return np.zeros(self.shape, dtype=complex)

    def random(self, rng, bandlimit=None):
        """Random slab function vanishing on the cap."""
        u = rng.standard_normal(self.shape) + 1j * rng.standard_normal(self.shape)
        if bandlimit is not None:
            u = np.stack([ScalarField.random(self.grid, rng, bandlimit=bandlimit).values for i in range(self.Nlambda + 1)])

        u[-1] = 0.
        return u


def default_delta(A):
    """kappa / (2 C)."""
    return A.kappa / (2. * A.Cbound)


class DeltaForm(object):
    """
    a_delta(u, v) = <A grad u, grad (1 + delta H) v> + <H D^(1/2) u, D^(1/2) (1 + delta H) v>.

    With H skew-adjoint, (1 + delta H) is the adjoint of (1 - delta H), and
    a_delta(u, v) = <K_delta u, v> with K_delta = (1 - delta H) K_0.
    Slab functions are arrays of shape slab.shape on the physical side.
    """

    def __init__(self, A, slab, delta):
        if A.n != slab.grid.n:
            raise error.UsageError("Coefficient dimension does not match grid", details="%d != %d" % (A.n, slab.grid.n))

        entries = A.entries
        if entries.ndim == 2:
            entries = np.broadcast_to(entries, slab.grid.shape + entries.shape)
        elif entries.shape[:-2] != slab.grid.shape:
            raise error.UsageError("Coefficient samples do not match grid", details=str(entries.shape))

        self.A = A
        self.entries = entries
        self.slab = slab
        self.delta = float(delta)

        grid = slab.grid
        xi, tau = grid.lattice
        self._axes = tuple(range(-grid.n - 1, 0))
        self._ixi = 1j * xi
        self._hilbert = 1j * np.sign(tau)
        self._half = np.sqrt(np.abs(tau))
        self._dt = 1j * tau

    def _fft(self, u):
        return np.fft.fftn(u, axes=self._axes, norm="ortho")

    def _ifft(self, u):
        return np.fft.ifftn(u, axes=self._axes, norm="ortho")

    def _multiply(self, u, symbol):
        return self._ifft(symbol * self._fft(u))

    def test_shift(self, v, sign=1):
        """(1 + sign delta H) v."""
        return self._multiply(v, 1 + sign * self.delta * self._hilbert)

    def midpoints(self, u):
        return (u[1:] + u[:-1]) / 2.

    def gradient(self, u):
        """(d_lambda u, grad_x u) on the cells, shape (n+1, Nlambda) + grid.shape."""
        mid = self._fft(self.midpoints(u))
        grad = [self._ifft(ixi * mid) for ixi in self._ixi]
        return np.stack([np.diff(u, axis=0) / self.slab.h] + grad)

    def half_derivative(self, u, hilbert=False):
        symbol = self._half * (self._hilbert if hilbert else 1)
        return self._multiply(self.midpoints(u), symbol)

    def _weight(self):
        return self.slab.h * self.slab.grid.dV

    def flux(self, u):
        """A grad u on the cells."""
        g = np.moveaxis(self.gradient(u), 0, -1)
        return np.moveaxis(np.einsum("...ij,...j->...i", self.entries, g), -1, 0)

    def unmodified(self, u, v):
        """a_0(u, v)."""
        flux = self.flux(u)
        hd = self.half_derivative(u, hilbert=True)
        return complex(self._weight() * (np.vdot(self.gradient(v), flux) + np.vdot(self.half_derivative(v), hd)))

    def __call__(self, u, v):
        return self.unmodified(u, self.test_shift(v))

    def grad_norm2(self, u):
        return float(self._weight() * np.sum(np.abs(self.gradient(u)) ** 2))

    def hd_norm2(self, u):
        return float(self._weight() * np.sum(np.abs(self.half_derivative(u, hilbert=True)) ** 2))

    def apply_unmodified(self, u):
        """K_0 u on all nodes, for the Euclidean pairing scaled by dV."""
        h = self.slab.h
        flux = self.flux(u)

        out = np.zeros_like(u)
        # transposed lambda difference
        out[:-1] -= flux[0] / h
        out[1:] += flux[0] / h

        div = sum(self._multiply(flux[1 + j], -self._ixi[j]) for j in range(self.slab.grid.n))
        div = div + self._multiply(self.midpoints(u), self._dt)
        out[:-1] += div / 2.
        out[1:] += div / 2.
        return h * out

    def apply(self, u):
        """K_delta u = (1 - delta H) K_0 u."""
        return self.test_shift(self.apply_unmodified(u), sign=-1)

    def mode_bands(self, mean=None):
        """
        Tridiagonal bands of K_delta per Fourier mode for constant coefficients
        `mean` (default: the average of A), shape (Nlambda+1,) + grid.shape.
        """
        a = np.mean(self.entries.reshape(-1, *self.entries.shape[-2:]), axis=0) if mean is None else mean
        grid = self.slab.grid
        xi, tau = grid.lattice
        h = self.slab.h

        beta = np.einsum("j,j...->...", a[0, 1:], xi)
        gamma = np.einsum("j,j...->...", a[1:, 0], xi)
        q = np.einsum("i...,ij,j...->...", xi, a[1:, 1:], xi) + 1j * tau

        dl = np.array([-1., 1.]) / h
        mid = np.array([.5, .5])

        def element(j, k):
            return h * (a[0, 0] * dl[j] * dl[k] + 1j * beta * dl[j] * mid[k] - 1j * gamma * mid[j] * dl[k] + q * mid[j] * mid[k])

        count = self.slab.Nlambda + 1
        diag = np.zeros((count,) + grid.shape, dtype=complex)
        upper = np.zeros((count - 1,) + grid.shape, dtype=complex)
        lower = np.zeros_like(upper)

        e00, e01, e10, e11 = element(0, 0), element(0, 1), element(1, 0), element(1, 1)
        diag[:-1] += e00
        diag[1:] += e11
        upper += e01
        lower += e10

        shift = 1 - 1j * self.delta * np.sign(tau)
        return lower * shift, diag * shift, upper * shift


def _thomas(lower, diag, upper, rhs):
    """Tridiagonal solve along axis 0, vectorized over the other axes."""
    count = len(diag)
    c = np.zeros_like(diag)
    d = np.zeros_like(rhs)

    beta = diag[0]
    c[0] = upper[0] / beta if count > 1 else 0
    d[0] = rhs[0] / beta
    for i in range(1, count):
        beta = diag[i] - lower[i - 1] * c[i - 1]
        if i < count - 1:
            c[i] = upper[i] / beta

        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / beta

    x = np.zeros_like(rhs)
    x[-1] = d[-1]
    for i in range(count - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]

    return x


def assemble_delta_form(A, slab, delta):
    if not delta > 0:
        raise error.UsageError("delta must be positive", details="delta=%g" % delta)

    return DeltaForm(A, slab, delta)


def unmodified_form(A, slab):
    return DeltaForm(A, slab, 0.)


def coercivity_margin(A, slab, delta, trials=100, rng=None):
    """
    min over random u (normalized by ||grad u||^2 + ||H D^(1/2) u||^2) of

        Re a_delta(u, u) - (kappa - C delta) ||grad u||^2 - delta ||H D^(1/2) u||^2.
    """
    form = assemble_delta_form(A, slab, delta)
    rng = rng or np.random.default_rng(0)

    margin = np.inf
    for i in range(trials):
        u = slab.random(rng)
        g2, hd2 = form.grad_norm2(u), form.hd_norm2(u)
        scale = g2 + hd2
        value = form(u, u).real - (A.kappa - A.Cbound * delta) * g2 - delta * hd2
        margin = min(margin, value / scale)

    logger.debug("coercivity margin %.3e over %d trials", margin, trials)
    return float(margin)


SlabSolution = collections.namedtuple("SlabSolution", ["slab", "values", "iterations", "residual", "method"])


def _trace(solution):
    return ScalarField(solution.slab.grid, solution.values[0], PHYSICAL)


def _profile(solution):
    slab = solution.slab
    fields = [ScalarField(slab.grid, v, PHYSICAL) for v in solution.values[1:]]
    return TransversalProfile(slab.nodes[1:], fields)


SlabSolution.trace = _trace
SlabSolution.profile = _profile


def discrete_conormal(form, u):
    """Discrete conormal derivative at lambda = 0: -(K_0 u)_0."""
    return ScalarField(form.slab.grid, -form.apply_unmodified(u)[0], PHYSICAL)


def solve_energy_bvp(A, slab, delta=None, neumann=None, dirichlet=None, tol=1e-11, gmres_factor=10, budget=None, dense_max=4096):
    """
    Lax-Milgram solve of the a_delta problem.

    Neumann data f: a_delta(u, v) = -<f, (1 + delta H) v|0> for all v.
    Dirichlet data g: u|0 = g and a_delta(u, v) = 0 for v|0 = 0.
    GMRES is preconditioned by the exact per-mode tridiagonal solve for the
    averaged coefficients; a dense solve is the fallback within `dense_max`.
    """
    if (neumann is None) == (dirichlet is None):
        raise error.UsageError("Exactly one of Neumann or Dirichlet data is required")

    delta = default_delta(A) if delta is None else delta
    form = assemble_delta_form(A, slab, delta)
    grid = slab.grid
    start = 0 if neumann is not None else 1
    stop = slab.Nlambda
    inner = (stop - start,) + grid.shape
    dof = int(np.prod(inner))

    def embed(x, head=None):
        u = slab.zeros()
        u[start:stop] = x.reshape(inner)
        if head is not None:
            u[0] = head

        return u

    if neumann is not None:
        rhs = slab.zeros()
        rhs[0] = -neumann.as_physical().values
        rhs = form.test_shift(rhs, sign=-1)[start:stop]
    else:
        rhs = -form.apply(embed(np.zeros(dof), dirichlet.as_physical().values))[start:stop]

    lower, diag, upper = form.mode_bands()
    lower, diag, upper = lower[start:stop - 1], diag[start:stop], upper[start:stop - 1]

    def matvec(x):
        return form.apply(embed(x))[start:stop].ravel()

    def precondition(x):
        r = form._fft(x.reshape(inner))
        return form._ifft(_thomas(lower, diag, upper, r)).ravel()

    op = scipy.sparse.linalg.LinearOperator((dof, dof), matvec=matvec, dtype=complex)
    pre = scipy.sparse.linalg.LinearOperator((dof, dof), matvec=precondition, dtype=complex)

    b = rhs.ravel()
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        values = embed(np.zeros(dof), None if dirichlet is None else dirichlet.as_physical().values)
        return SlabSolution(slab, values, 0, 0., "trivial")

    budget = budget or gmres_factor * dof
    restart = min(budget, 50)
    counter = [0]

    def count(residual):
        counter[0] += 1

    x, info = scipy.sparse.linalg.gmres(op, b, rtol=tol, atol=0., restart=restart, maxiter=max(1, budget // restart),
                                        M=pre, callback=count, callback_type="pr_norm")
    residual = float(np.linalg.norm(matvec(x) - b) / bnorm)
    method = "gmres"
    logger.debug("gmres: info=%d, %d iterations, residual %.3e", info, counter[0], residual)

    if residual > WEAK_RESIDUAL_TOL:
        if dof > dense_max:
            raise error.SolverError("Krylov solve did not converge", residual=residual, iterations=counter[0])

        logger.warning("gmres residual %.3e after %d iterations, using a dense solve", residual, counter[0])
        dense = np.column_stack([matvec(col) for col in np.eye(dof, dtype=complex)])
        x = np.linalg.solve(dense, b)
        residual = float(np.linalg.norm(matvec(x) - b) / bnorm)
        method = "dense"

    values = embed(x, None if dirichlet is None else dirichlet.as_physical().values)
    return SlabSolution(slab, values, counter[0], residual, method)


def energy_estimate_ratio(F, h, fam):
    """
    Slab L2 mass of a conormal profile divided by ||h||^2 in the
    H^(-1/2)_P scale, by the trapezoid rule over the profile nodes.
    """
    if not F.is_conormal:
        raise error.UsageError("Energy estimate expects a conormal profile")

    mass = np.array([f.norm() ** 2 for f in F.fields])
    total = integrate.trapezoid(mass, np.abs(F.nodes))
    norm = dirac.sobolev_scale_norm(h, -0.5, fam, "P")
    if norm == 0:
        return 0.

    return float(total / norm ** 2)
