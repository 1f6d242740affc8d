# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

"""
Extensions, layer potentials and boundary operators, per frequency.

Boundary operators acting on scalars are stored as multipliers, arrays of
shape grid.shape. The r-block of a vector in the closure of ran(P) is
parallel to w = (xi, sgn(tau)|tau|^(1/2)), so the r-data of a mode reduce
to one coefficient along w/|w|.
"""

import collections

import numpy as np
from scipy import integrate

from paradirac import dirac, error, log
from paradirac.spectral import SPECTRAL, ConormalField, ScalarField, TransversalProfile


logger = log.get_logger(__name__)

COMPATIBILITY_TOL = 1e-8
SINGULAR_TOL = 1e-10


class BoundaryDatum(object):
    """A conormal datum at lambda = 0 for the upper or lower half-space."""

    def __init__(self, value, regularity=-0.5, side="upper", tol=COMPATIBILITY_TOL):
        if side not in ("upper", "lower"):
            raise error.UsageError("Unknown half-space", details=side)

        if not -1 <= regularity <= 0:
            raise error.UsageError("Sobolev order out of range", details="s=%g" % regularity)

        residual = value.compatibility_residual()
        if residual > tol:
            raise error.DomainError("Datum is not in the closure of ran(P)", residual=residual, details="residual %.3e" % residual)

        self.value = value.as_spectral()
        self.regularity = regularity
        self.side = side

    def __repr__(self):
        return "BoundaryDatum(s=%g, side=%s)" % (self.regularity, self.side)


def _signed_nodes(nodes, side):
    nodes = np.asarray(nodes, dtype=float)
    if side == "upper" and np.any(nodes <= 0) or side == "lower" and np.any(nodes >= 0):
        raise error.UsageError("Transversal nodes lie in the wrong half-space", details=side)

    return nodes


def _side_of(nodes):
    return "upper" if np.asarray(nodes)[0] > 0 else "lower"


def _extension(h, fam, nodes, operand, make_function):
    mat = fam.operand(operand)
    fields, derivatives = [], []
    for lam in nodes:
        field = dirac.apply_matrices(fam.matrix_function(make_function(abs(lam)), operand), h)
        fields.append(field)
        # d/dlambda e^(-lambda z) = -z e^(-lambda z)
        derivatives.append(-dirac.apply_matrices(mat, field))

    return TransversalProfile(nodes, fields, derivatives)


def cauchy_extension(h, fam, nodes):
    """
    F(lambda) = e^(-lambda PM) chi+(PM) h for lambda > 0, or
    e^(-lambda PM) chi-(PM) h for lambda < 0, on the given nodes.
    """
    nodes = _signed_nodes(nodes, h.side)
    return _extension(h.value, fam, nodes, "pm", lambda mu: dirac.cauchy(mu, h.side))


def semigroup_extension(h, fam, nodes, operand="pm"):
    """e^(-|lambda| [op]) h; kernel modes stay constant in lambda."""
    nodes = np.asarray(nodes, dtype=float)
    _signed_nodes(nodes, _side_of(nodes))
    return _extension(h.as_spectral(), fam, nodes, operand, dirac.exp_decay)


def _scalar_potential(F, grid):
    """u with F_r = i w u at nonzero frequencies; the zero mode is set to 0."""
    w, norm = dirac.reduced_direction(grid)
    coeffs = np.moveaxis(F[1:], 0, -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = -1j * np.sum(w.conj() * coeffs, axis=-1) / norm ** 2

    u[grid.zero_index()] = 0.
    return u


def conormal_differential(u, A):
    """
    D_A u = [A_pp d_lambda u + A_pr grad_x u, grad_x u, H D^(1/2) u] for a
    scalar profile, using its exact lambda-derivative when available.
    """
    if u.is_conormal:
        raise error.UsageError("Conormal differential expects a scalar profile")

    a = A.constant_value()
    grid = u.grid
    xi, tau = grid.lattice
    rtau = np.sign(tau) * np.sqrt(np.abs(tau))

    values = u.stack(SPECTRAL)
    dl = u.derivative_stack(SPECTRAL)

    fields = []
    for v, dv in zip(values, dl):
        grad = 1j * xi * v
        perp = a[0, 0] * dv + np.einsum("j,j...->...", a[0, 1:], grad)
        fields.append(ConormalField(grid, np.concatenate([perp[None], grad, (1j * rtau * v)[None]]), SPECTRAL))

    return TransversalProfile(u.nodes, fields)


Reconstruction = collections.namedtuple("Reconstruction", ["profile", "constant_free", "residual"])


def potential_reconstruct(F, A, tol=COMPATIBILITY_TOL):
    """
    Scalar solution u with D_A u = F, up to a constant.

    grad_x u and H D^(1/2) u are read off the r-block, d_lambda u is
    (M F)_perp. Returns a `Reconstruction`; `constant_free` is always set
    since the zero mode of u is not determined by F.
    """
    if not F.is_conormal:
        raise error.UsageError("Reconstruction expects a conormal profile")

    residual = max(f.compatibility_residual() for f in F.fields)
    if residual > tol:
        raise error.DomainError("Profile is not compatible", residual=residual, details="residual %.3e" % residual)

    m, N, mt = dirac.coefficient_multiplier(A)
    grid = F.grid

    fields, derivatives = [], []
    for f in F.fields:
        coeffs = f.as_spectral().values
        fields.append(ScalarField(grid, _scalar_potential(coeffs, grid), SPECTRAL))
        derivatives.append(ScalarField(grid, np.einsum("j,j...->...", m[0], coeffs), SPECTRAL))

    u = TransversalProfile(F.nodes, fields, derivatives)
    back = conormal_differential(u, A)

    scale = max(max(f.norm() for f in F.fields), np.finfo(float).tiny)
    diff = max((b - f.as_spectral()).norm() for b, f in zip(back.fields, F.fields))
    return Reconstruction(u, True, diff / scale)


def _perp(vec):
    return vec[..., 0]


def _e_perp(fam):
    e = np.zeros(fam.grid.shape + (fam.d,), dtype=complex)
    e[..., 0] = 1.
    return e


def _matvec(mats, vecs):
    return np.einsum("...ij,...j->...i", mats, vecs)


def _sign(lam):
    return 1. if lam > 0 else -1.


def single_layer_multiplier(fam, lam):
    """
    S_lambda per mode with its lambda-derivative:

        S_lambda = -(P^-1 e^(-lambda PM) chi+(PM) [1, 0])_perp    (lambda > 0)
        S_lambda = +(P^-1 e^(-lambda PM) chi-(PM) [1, 0])_perp    (lambda < 0)
    """
    side = "upper" if lam > 0 else "lower"
    cauchy = _matvec(fam.matrix_function(dirac.cauchy(abs(lam), side)), _e_perp(fam))
    value = -_sign(lam) * _perp(_matvec(fam.p_pinv, cauchy))
    derivative = _sign(lam) * _perp(_matvec(fam.p_pinv, _matvec(fam.pm, cauchy)))
    return value, derivative


def double_layer_multiplier(fam, lam):
    """
    D_lambda per mode with its lambda-derivative:

        D_lambda = -(pi_P e^(-lambda MP) chi+(MP) pi_MP [1, 0])_perp    (lambda > 0)
        D_lambda = +(pi_P e^(-lambda MP) chi-(MP) pi_MP [1, 0])_perp    (lambda < 0)
    """
    side = "upper" if lam > 0 else "lower"
    start = _matvec(fam.matrix_function(dirac.ran_projector, "mp"), _e_perp(fam))
    cauchy = _matvec(fam.matrix_function(dirac.cauchy(abs(lam), side), "mp"), start)
    proj = fam.matrix_function(dirac.ran_projector, "p")
    value = -_sign(lam) * _perp(_matvec(proj, cauchy))
    derivative = _sign(lam) * _perp(_matvec(proj, _matvec(fam.mp, cauchy)))
    return value, derivative


def layer_trace_multipliers(fam):
    """
    Boundary traces of the layer potentials per mode: S0 (with its jump, which
    vanishes), D0+ and D0-, conormal derivatives of S at 0+ and 0-, conormal
    derivative of D at 0 and K = (D0+ + D0-) / 2.
    """
    proj = fam.projectors
    e = _e_perp(fam)
    cp, cm = _matvec(proj.chi_plus, e), _matvec(proj.chi_minus, e)

    pi_p = fam.matrix_function(dirac.ran_projector, "p")
    start = _matvec(fam.matrix_function(dirac.ran_projector, "mp"), e)
    dp = -_perp(_matvec(pi_p, _matvec(fam.matrix_function(dirac.chi_plus, "mp"), start)))
    dm = _perp(_matvec(pi_p, _matvec(fam.matrix_function(dirac.chi_minus, "mp"), start)))

    s_plus = -_perp(_matvec(fam.p_pinv, cp))
    s_minus = _perp(_matvec(fam.p_pinv, cm))

    return {
        "S0": s_plus,
        "S0 jump": s_plus - s_minus,
        "D0+": dp,
        "D0-": dm,
        "dnu S0+": _perp(cp),
        "dnu S0-": -_perp(cm),
        "dnu D0": _perp(_matvec(proj.chi_plus, _matvec(fam.p, e))),
        "K": (dp + dm) / 2.
    }


def _multiply(mult, f):
    return ScalarField(f.grid, mult * f.as_spectral().values, SPECTRAL)


LayerPotential = collections.namedtuple("LayerPotential", ["profile", "traces"])


def layer_potentials(f, fam, nodes, kind="single", side="upper"):
    """
    Single or double layer potential of the boundary scalar `f` on the nodes
    of one half-space, with the boundary traces applied to `f`.
    """
    if kind not in ("single", "double"):
        raise error.UsageError("Unknown layer kind", details=kind)

    if f.grid != fam.grid:
        raise error.UsageError("Field and symbol family live on different grids")

    nodes = _signed_nodes(nodes, side)
    evaluate = single_layer_multiplier if kind == "single" else double_layer_multiplier

    fields, derivatives = [], []
    for lam in nodes:
        value, derivative = evaluate(fam, lam)
        fields.append(_multiply(value, f))
        derivatives.append(_multiply(derivative, f))

    traces = {name: _multiply(mult, f) for name, mult in layer_trace_multipliers(fam).items()}
    return LayerPotential(TransversalProfile(nodes, fields, derivatives), traces)


def boundary_pair(f):
    """[f, 0] as a conormal field."""
    grid = f.grid
    values = np.zeros((grid.n + 2,) + grid.shape, dtype=complex)
    values[0] = f.as_spectral().values
    return ConormalField(grid, values, SPECTRAL)


def layer_cauchy_residual(f, fam, nodes, kind="single"):
    """
    max over nodes of ||D_A S_lambda f - sgn(lambda) C_lambda [f, 0]|| (single) or
    ||D_A D_lambda f - sgn(lambda) C_lambda P [f, 0]|| (double), relative.
    """
    side = _side_of(nodes)
    layer = layer_potentials(f, fam, nodes, kind, side)
    lhs = conormal_differential(layer.profile, fam.A)

    h = boundary_pair(f)
    if kind == "double":
        h = dirac.apply_matrices(fam.p, h)

    rhs = _extension(h, fam, nodes, "pm", lambda mu: dirac.cauchy(mu, side))
    scale = max(max(g.norm() for g in rhs.fields), np.finfo(float).tiny)
    return max((a - _sign(nodes[0]) * b).norm() for a, b in zip(lhs.fields, rhs.fields)) / scale


def reduced_sign_blocks(fam, projector=None):
    """
    2x2 blocks of a projector (default sgn(PM)) in the basis (e_perp, w/|w|),
    as arrays of shape grid.shape. Entries are 0 at the zero frequency.
    """
    mats = fam.projectors.sgn if projector is None else projector
    w, norm = dirac.reduced_direction(fam.grid, fam.backward)
    with np.errstate(divide="ignore", invalid="ignore"):
        what = np.where(norm[..., None] > 0, w / norm[..., None], 0.)

    pp = mats[..., 0, 0]
    pr = np.einsum("...j,...j->...", mats[..., 0, 1:], what)
    rp = np.einsum("...j,...j->...", what.conj(), mats[..., 1:, 0])
    rr = np.einsum("...i,...ij,...j->...", what.conj(), mats[..., 1:, 1:], what)
    return pp, pr, rp, rr


def layer_sign_residual(fam):
    """
    Distance between chi+(PM) and its representation by boundary layers:
    [[dnu S0+, -dnu D0 Dr^-1], [Dr S0, -Dr D0+ Dr^-1]] with Dr = i|w| per mode.
    """
    traces = layer_trace_multipliers(fam)
    grid = fam.grid
    w, norm = dirac.reduced_direction(grid)
    nonzero = norm > 0

    with np.errstate(divide="ignore", invalid="ignore"):
        layers = [traces["dnu S0+"], -traces["dnu D0"] / (1j * norm), 1j * norm * traces["S0"], -traces["D0+"]]

    spectral = reduced_sign_blocks(fam, fam.projectors.chi_plus)
    return float(max(np.max(np.abs(a - b)[nonzero]) for a, b in zip(layers, spectral)))


class DtNOperators(object):
    """
    Neumann-to-Dirichlet and Dirichlet-to-Neumann multipliers for both
    half-spaces, from both factorizations through the blocks of sgn(PM).

    The r-data of a mode are the coefficient along w/|w|. Frequencies where
    a block is singular are masked out of the aggregates and counted.
    """

    def __init__(self, fam):
        pp, pr, rp, rr = reduced_sign_blocks(fam)
        grid = fam.grid
        w, norm = dirac.reduced_direction(grid)

        excluded = norm == 0
        for block in (pr, rp, 1 - pp, 1 - rr, 1 + pp, 1 + rr):
            excluded |= np.abs(block) < SINGULAR_TOL

        self.mask = ~excluded
        self.singular = int(np.count_nonzero(excluded & (norm > 0)))
        if self.singular:
            logger.warning("%d frequencies with a singular block of sgn(PM)", self.singular)

        def div(a, b):
            return np.where(self.mask, a, 0.) / np.where(self.mask, b, 1.)

        self.nd_plus = div(1 - pp, pr)
        self.nd_plus_alt = div(rp, 1 - rr)
        self.dn_plus = div(1 - rr, rp)
        self.dn_plus_alt = div(pr, 1 - pp)

        self.nd_minus = -div(1 + pp, pr)
        self.nd_minus_alt = -div(rp, 1 + rr)
        self.dn_minus = -div(1 + rr, rp)
        self.dn_minus_alt = -div(pr, 1 + pp)

    def residuals(self):
        def res(a):
            return float(np.max(np.abs(a[self.mask]))) if self.mask.any() else 0.

        return {
            "inverse+": res(self.dn_plus * self.nd_plus - 1),
            "inverse-": res(self.dn_minus * self.nd_minus - 1),
            "factorization ND+": res(self.nd_plus - self.nd_plus_alt),
            "factorization DN+": res(self.dn_plus - self.dn_plus_alt),
            "factorization ND-": res(self.nd_minus - self.nd_minus_alt),
            "factorization DN-": res(self.dn_minus - self.dn_minus_alt)
        }

    def dirichlet_datum(self, u0, side="upper"):
        """Conormal datum [dnu u, grad_x u, H D^(1/2) u] at lambda = 0 of the solution with trace u0."""
        grid = u0.grid
        w, norm = dirac.reduced_direction(grid)
        coeff = 1j * norm * u0.as_spectral().values
        dn = self.dn_plus if side == "upper" else self.dn_minus
        values = np.concatenate([(dn * coeff)[None], np.moveaxis(1j * w * u0.as_spectral().values[..., None], -1, 0)])
        return ConormalField(grid, np.where(self.mask, values, 0.), SPECTRAL)


def dtn_operators(fam):
    return DtNOperators(fam)


def greens_reconstruct(u_trace, conormal_trace, fam, nodes, side="upper"):
    """
    u(lambda) = S_lambda(dnu u|0) - D_lambda(u|0) + c (upper) or
    u(lambda) = -S_lambda(dnu u|0) + D_lambda(u|0) + c (lower), with c the
    zero mode of u|0.
    """
    nodes = _signed_nodes(nodes, side)
    sign = 1. if side == "upper" else -1.
    zero = np.zeros(fam.grid.shape, dtype=complex)
    zero[fam.grid.zero_index()] = u_trace.as_spectral().values[fam.grid.zero_index()]
    constant = ScalarField(fam.grid, zero, SPECTRAL)

    fields, derivatives = [], []
    for lam in nodes:
        s, ds = single_layer_multiplier(fam, lam)
        d, dd = double_layer_multiplier(fam, lam)
        fields.append(sign * (_multiply(s, conormal_trace) - _multiply(d, u_trace)) + constant)
        derivatives.append(sign * (_multiply(ds, conormal_trace) - _multiply(dd, u_trace)))

    return TransversalProfile(nodes, fields, derivatives)


class ModeSolution(object):
    """
    Decaying solution u(lambda) = u0 e^(-lambda rho) of one Fourier mode.

    rho solves A_pp rho^2 - i rho (A_pr + A_rp).xi - (xi.A_rr xi + i tau) = 0
    with Re rho > 0 (upper) or Re rho < 0 (lower).
    """

    def __init__(self, A, xi, tau, rho, u0):
        a = A.constant_value()
        self.xi = np.asarray(xi, dtype=float)
        self.tau = float(tau)
        self.rho = rho
        self.u0 = u0
        self.conormal = (-rho * a[0, 0] + 1j * np.dot(a[0, 1:], self.xi)) * u0
        self.dtn = self.conormal / u0 if u0 != 0 else -rho * a[0, 0] + 1j * np.dot(a[0, 1:], self.xi)

    def __repr__(self):
        return "ModeSolution(rho=%s, u0=%s)" % (self.rho, self.u0)

    @property
    def ntd(self):
        return 1. / self.dtn

    def evaluate(self, lam):
        return self.u0 * np.exp(-np.asarray(lam) * self.rho)

    def derivative(self, lam):
        return -self.rho * self.evaluate(lam)

    def trace(self):
        """Conormal differential at lambda = 0."""
        r = np.sign(self.tau) * np.sqrt(abs(self.tau))
        return np.concatenate([[self.conormal], 1j * self.xi * self.u0, [1j * r * self.u0]])


def per_mode_bvp_oracle(A, xi, tau, data="dirichlet", value=1., side="upper"):
    """Closed-form decaying solution of one mode with Dirichlet or Neumann data."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if not np.any(xi) and tau == 0:
        raise error.UsageError("The oracle needs a nonzero frequency")

    if data not in ("dirichlet", "neumann"):
        raise error.UsageError("Unknown data kind", details=data)

    a = A.constant_value()
    beta = np.dot(a[0, 1:] + a[1:, 0], xi)
    gamma = np.dot(xi, a[1:, 1:] @ xi)
    roots = np.roots([a[0, 0], -1j * beta, -(gamma + 1j * tau)])

    scale = max(np.abs(roots))
    if np.any(np.abs(roots.real) <= 1e-12 * scale):
        raise error.InternalError("Characteristic root on the imaginary axis", details="roots %s" % roots)

    pick = roots[roots.real > 0] if side == "upper" else roots[roots.real < 0]
    if len(pick) != 1:
        raise error.InternalError("Characteristic roots do not split", details="roots %s" % roots)

    rho = complex(pick[0])
    if data == "dirichlet":
        return ModeSolution(A, xi, tau, rho, complex(value))

    flux = -rho * a[0, 0] + 1j * np.dot(a[0, 1:], xi)
    return ModeSolution(A, xi, tau, rho, complex(value) / flux)


def single_layer_integral(fam, eps, R, ratio=2 ** 0.25):
    """
    Per-mode quadrature of the integral of S_lambda over eps <= |lambda| <= R,
    trapezoid in log(lambda) on both half-lines.
    """
    if not 0 < eps <= R:
        raise error.UsageError("Need 0 < eps <= R", details="eps=%g R=%g" % (eps, R))

    total = np.zeros(fam.grid.shape, dtype=complex)
    if eps == R:
        return total

    count = max(2, int(np.ceil(np.log(R / eps) / np.log(ratio))) + 1)
    nodes = np.geomspace(eps, R, count)
    logs = np.log(nodes)
    for sign in (1., -1.):
        values = np.array([single_layer_multiplier(fam, sign * lam)[0] * lam for lam in nodes])
        total += integrate.trapezoid(values, logs, axis=0)

    return total


def inverse_whole_space(f, fam, eps=1e-5, R=1e3, ratio=2 ** 0.25, tol=1e-12):
    """
    Truncated integral of S_lambda f over eps <= |lambda| <= R. As eps -> 0
    and R -> inf it tends to -L^-1 f, L having symbol xi.A_rr xi + i tau.

    The inner cut leaves a relative error of about eps |rho|^(1/2) per mode,
    rho the symbol of L, linear in eps. The defaults are accurate to 1e-4
    while |rho| <= 1e2; pass a smaller eps for higher frequencies. The outer
    cut decays like e^(-R |rho|^(1/2)).
    """
    coeffs = f.as_spectral().values
    zero = fam.grid.zero_index()
    if abs(coeffs[zero]) > tol * max(f.norm(), np.finfo(float).tiny):
        raise error.DomainError("The zero mode of the source must vanish")

    return _multiply(single_layer_integral(fam, eps, R, ratio), f)


def whole_space_symbol(fam):
    """xi.A_rr xi + i tau on the lattice."""
    a = fam.A.constant_value()
    xi, tau = fam.grid.lattice
    return np.einsum("i...,ij,j...->...", xi, a[1:, 1:], xi) + 1j * tau


def single_layer_duality_residual(fam, f, g, lam):
    """|<g, S_lambda f> - <S*_(-lambda) g, f>| / (||f|| ||g||) with the backward family."""
    back = fam.adjoint_family()
    s, ds = single_layer_multiplier(fam, lam)
    t, dt = single_layer_multiplier(back, -lam)
    lhs = g.as_spectral().inner(_multiply(s, f))
    rhs = _multiply(t, g).inner(f.as_spectral())
    return abs(lhs - rhs) / max(f.norm() * g.norm(), np.finfo(float).tiny)


def double_layer_duality_residual(fam, f, g, lam):
    """|<g, D_lambda f> - <dnu* S*_(-lambda) g, f>| / (||f|| ||g||)."""
    back = fam.adjoint_family()
    d, dd = double_layer_multiplier(fam, lam)

    side = "upper" if -lam > 0 else "lower"
    cauchy = _matvec(back.matrix_function(dirac.cauchy(abs(lam), side)), _e_perp(back))
    conormal = -_sign(lam) * _perp(cauchy)

    lhs = g.as_spectral().inner(_multiply(d, f))
    rhs = _multiply(conormal, g).inner(f.as_spectral())
    return abs(lhs - rhs) / max(f.norm() * g.norm(), np.finfo(float).tiny)


def abstract_green_residual(fam, u0, w0):
    """
    |<dnu u|0, w|0> - <u|0, dnu* w|0>| / (||u0|| ||w0||) for decaying upper
    solutions u of L (spectral Dirichlet-to-Neumann map) and w of the backward
    equation (mode oracle with A* and reversed time).
    """
    grid = fam.grid
    dtn = DtNOperators(fam)
    w, norm = dirac.reduced_direction(grid)
    conormal_u = ScalarField(grid, np.where(dtn.mask, dtn.dn_plus * 1j * norm, 0.) * u0.as_spectral().values, SPECTRAL)

    adjoint = fam.A.adjoint()
    back = np.zeros(grid.shape, dtype=complex)
    for index in zip(*np.nonzero(dtn.mask)):
        xi, tau = grid.frequency(index)
        back[index] = per_mode_bvp_oracle(adjoint, xi, -tau).dtn

    w0s = w0.as_spectral()
    masked_w0 = ScalarField(grid, np.where(dtn.mask, w0s.values, 0.), SPECTRAL)
    conormal_w = ScalarField(grid, back * w0s.values, SPECTRAL)

    lhs = conormal_u.inner(masked_w0)
    rhs = ScalarField(grid, np.where(dtn.mask, u0.as_spectral().values, 0.), SPECTRAL).inner(conormal_w)
    return abs(lhs - rhs) / max(u0.norm() * w0.norm(), np.finfo(float).tiny)
