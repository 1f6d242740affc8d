# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

"""
Measurements on transversal profiles: square functions, non-tangential
maximal functions, Whitney traces, reverse Hoelder and Rellich ratios, and
the invertibility diagnostics of the boundary operators.
"""

import collections

import numpy as np
from scipy import integrate, ndimage, special

from paradirac import dirac, error, log, potentials
from paradirac.spectral import PHYSICAL, SPECTRAL, ConormalField, ScalarField


logger = log.get_logger(__name__)

MIN_SQUARE_NODES = 16
RELLICH_MIN_NORM = 1e-8


class WhitneyConfig(object):
    """
    Whitney regions (c0 lam, c1 lam) x B(x, c2 lam) x (t - c3 lam^2, t + c3 lam^2)
    as axis-aligned index boxes.
    """

    def __init__(self, c0=1., c1=2., c2=1., c3=1.):
        if not 0 < c0 < c1:
            raise error.UsageError("Whitney window needs 0 < c0 < c1", details="c0=%g c1=%g" % (c0, c1))

        if c2 <= 0 or c3 <= 0:
            raise error.UsageError("Whitney radii must be positive", details="c2=%g c3=%g" % (c2, c3))

        self.c0, self.c1, self.c2, self.c3 = float(c0), float(c1), float(c2), float(c3)

    def __repr__(self):
        return "WhitneyConfig(c0=%g, c1=%g, c2=%g, c3=%g)" % (self.c0, self.c1, self.c2, self.c3)

    def __json__(self):
        return {"c0": self.c0, "c1": self.c1, "c2": self.c2, "c3": self.c3}

    def scaled(self, space=1., time=1.):
        return WhitneyConfig(self.c0, self.c1, self.c2 * space, self.c3 * time)

    def box_radii(self, grid, lam):
        """Index radii of the (x, t) box around a point, capped to the torus."""
        rx = min(int(np.floor(self.c2 * lam / grid.dx)), grid.Nx // 2)
        rt = min(int(np.floor(self.c3 * lam ** 2 / grid.dt)), grid.Nt // 2)
        return rx, rt

    def box_sizes(self, grid, lam):
        rx, rt = self.box_radii(grid, lam)
        return (min(2 * rx + 1, grid.Nx),) * grid.n + (min(2 * rt + 1, grid.Nt),)


def _norm2_stack(profile, side=SPECTRAL):
    values = profile.stack(side)
    return np.sum(np.abs(values) ** 2, axis=tuple(range(1, values.ndim))) * profile.grid.dV


def _log_quadrature(nodes, integrand):
    """
    Integral of integrand d(lam)/lam, trapezoid in log(lam) plus a power-law
    tail below the first node.
    """
    logs = np.log(nodes)
    total = integrate.trapezoid(integrand, logs)

    g0, g1 = integrand[0], integrand[1]
    if g0 > 0 and g1 > 0:
        slope = np.log(g1 / g0) / (logs[1] - logs[0])
        if slope > 0:
            total += g0 / slope

    return float(total)


def square_function(F, s=0., derivative=True):
    """
    Integral over the nodes of ||lam^(-s) lam d_lam F||^2 dlam/lam
    (`derivative`) or of ||lam^(-s) F||^2 dlam/lam.
    """
    if len(F) < MIN_SQUARE_NODES:
        raise error.UsageError("Square function needs at least %d nodes" % MIN_SQUARE_NODES, details="%d given" % len(F))

    if not -1 <= s <= 0:
        raise error.UsageError("Weight exponent out of range", details="s=%g" % s)

    nodes = np.abs(F.nodes)
    if derivative:
        values = F.derivative_stack(SPECTRAL)
        mass = np.sum(np.abs(values) ** 2, axis=tuple(range(1, values.ndim))) * F.grid.dV
        integrand = nodes ** (2 - 2 * s) * mass
    else:
        integrand = nodes ** (-2 * s) * _norm2_stack(F)

    return _log_quadrature(nodes, integrand)


def square_function_closed_form(h, fam, s=0., derivative=True):
    """
    Exact square function of the Cauchy extension of `h` from the
    eigendecomposition of pm, on the frequencies carried by `h`:

        sum_kl conj(a_k) a_l <v_k, v_l> Gamma(q) / (conj(m_k) + m_l)^q

    with a_k = m_k c_k and q = 2 - 2s for the derivative form, a_k = c_k and
    q = -2s otherwise.
    """
    q = 2 - 2 * s if derivative else -2 * s
    if q <= 0:
        raise error.UsageError("The undifferentiated square function needs s < 0")

    w, V, Vinv, kernel, fallback = fam.eig("pm")
    coeffs = np.moveaxis(h.value.values, 0, -1).reshape(-1, fam.d)
    sign = 1 if h.side == "upper" else -1

    total = 0.
    for index in np.flatnonzero(np.any(np.abs(coeffs) > 0, axis=1)):
        keep = ~kernel[index] & (sign * w[index].real > 0)
        if not keep.any():
            continue

        if index in fallback:
            raise error.ConditioningError("No stable eigenbasis for the closed form", frequency=fam.frequency(index))

        m = sign * w[index][keep]
        c = (Vinv[index] @ coeffs[index])[keep]
        v = V[index][:, keep]
        a = m * c if derivative else c
        gram = v.conj().T @ v
        z = m.conj()[:, None] + m[None, :]
        total += np.real(np.sum(a.conj()[:, None] * a[None, :] * gram * special.gamma(q) / z ** q))

    return float(total * fam.grid.dV)


def _physical_density(profile):
    """|F|^2 at each node on the physical side, shape (nodes,) + grid.shape."""
    values = profile.stack(PHYSICAL)
    if profile.is_conormal:
        return np.sum(np.abs(values) ** 2, axis=1)

    return np.abs(values) ** 2


def _box_average(values, sizes):
    if np.iscomplexobj(values):
        return _box_average(values.real, sizes) + 1j * _box_average(values.imag, sizes)

    return ndimage.uniform_filter(values, size=sizes, mode="wrap")


def _windows(nodes, cfg):
    """Admissible centers with the indices and weights of their lambda-window."""
    nodes = np.abs(nodes)
    widths = np.gradient(nodes)
    out = []
    for j, lam in enumerate(nodes):
        if cfg.c0 * lam < nodes[0] or cfg.c1 * lam > nodes[-1]:
            continue

        inside = np.flatnonzero((nodes >= cfg.c0 * lam) & (nodes <= cfg.c1 * lam))
        if len(inside):
            out.append((lam, inside, widths[inside] / np.sum(widths[inside])))

    return out


def _whitney_averages(profile, cfg):
    density = _physical_density(profile)
    grid = profile.grid
    for lam, inside, weights in _windows(profile.nodes, cfg):
        mean = np.tensordot(weights, density[inside], axes=1)
        yield lam, inside, weights, _box_average(mean, cfg.box_sizes(grid, lam))


def nontangential_maximal(F, cfg):
    """N*F(x, t): sup over centers of the root mean square of |F| over the Whitney box."""
    best = None
    for lam, inside, weights, average in _whitney_averages(F, cfg):
        best = average if best is None else np.maximum(best, average)

    if best is None:
        raise error.UsageError("No Whitney window fits in the node range", details=repr(cfg))

    return ScalarField(F.grid, np.sqrt(np.maximum(best, 0.)), PHYSICAL)


Sandwich = collections.namedtuple("Sandwich", ["window_max", "maximal", "integral", "K1", "K2"])


def sandwich_constants(F, cfg):
    """
    Both sides of

        sup_lam M(lam) <= K1 ||N*F||^2 <= K1 K2 int ||F||^2 dlam/lam,

    with M(lam) the window mean of ||F||^2. Box averages preserve the integral,
    so K1 = 1; K2 is the largest node weight max_k mu_k sum_{j: k in W_j} 1/|W_j|.
    """
    nodes = np.abs(F.nodes)
    widths = np.gradient(nodes)
    mass = _norm2_stack(F)

    windows = _windows(F.nodes, cfg)
    if not windows:
        raise error.UsageError("No Whitney window fits in the node range", details=repr(cfg))

    share = np.zeros(len(nodes))
    window_max = 0.
    for lam, inside, weights in windows:
        window_max = max(window_max, float(np.dot(weights, mass[inside])))
        share[inside] += 1. / np.sum(widths[inside])

    maximal = nontangential_maximal(F, cfg).norm() ** 2
    integral = float(np.sum(widths / nodes * mass))
    return Sandwich(window_max, maximal, integral, 1., float(np.max(nodes * share)))


def whitney_trace_deviation(F, h, cfg):
    """
    Per (x, t), the Whitney average of |F - h(x, t)|^2 at the smallest
    admissible center.
    """
    windows = _windows(F.nodes, cfg)
    if not windows:
        raise error.UsageError("No Whitney window fits in the node range", details=repr(cfg))

    lam, inside, weights = windows[0]
    grid = F.grid
    sizes = cfg.box_sizes(grid, lam)

    values = F.stack(PHYSICAL)[inside]
    target = h.as_physical().values
    if not F.is_conormal:
        values, target = values[:, None], target[None]

    square = _box_average(np.tensordot(weights, np.sum(np.abs(values) ** 2, axis=1), axes=1), sizes)
    mean = np.stack([_box_average(np.tensordot(weights, values[:, c], axes=1), sizes) for c in range(values.shape[1])])
    deviation = square - 2 * np.sum(np.real(target.conj() * mean), axis=0) + np.sum(np.abs(target) ** 2, axis=0)
    return ScalarField(grid, np.maximum(deviation.real, 0.), PHYSICAL)


WhitneyRegion = collections.namedtuple("WhitneyRegion", ["lam", "r", "x", "t"])


def _time_derivatives(u, grid):
    xi, tau = grid.lattice
    coeffs = u.stack(SPECTRAL)
    axes = tuple(range(1, grid.n + 2))

    def back(symbol):
        return np.fft.ifftn(symbol * coeffs, axes=axes, norm="ortho")

    grad_x = np.stack([back(1j * xi[j]) for j in range(grid.n)], axis=1)
    half = np.sqrt(np.abs(tau))
    return grad_x, back(1j * np.sign(tau) * half), back(half)


def reverse_holder_ratio(u, region, uniform_weights=False):
    """
    LHS / RHS of the reverse Hoelder inequality for a scalar solution profile:

        LHS = (mean over W of |grad u|^2 + |H D^(1/2) u|^2 + |D^(1/2) u|^2)^(1/2)
        RHS = sum_k (1 + |k|^(3/2))^-1 mean over 8W_k of |grad u| + |H D^(1/2) u| + |D^(1/2) u|

    with W = (lam - r, lam + r) x Q(x, r) x (t - r^2, t + r^2] and W_k its
    8-fold enlargement translated in time by 2 k r^2.
    """
    if u.is_conormal:
        raise error.UsageError("Reverse Hoelder ratio expects a scalar profile")

    grid = u.grid
    nodes = np.abs(u.nodes)
    lam, r = region.lam, region.r

    if not 0 < r < lam / 8.:
        raise error.DomainError("Region radius must satisfy 0 < r < lam/8", details="lam=%g r=%g" % (lam, r))

    if lam - 8 * r < nodes[0] or lam + 8 * r > nodes[-1] or 16 * r > grid.Lx:
        raise error.DomainError("Enlarged region leaves the slab", details="lam=%g r=%g" % (lam, r))

    grad_x, hd, d = _time_derivatives(u, grid)
    dl = np.fft.ifftn(u.derivative_stack(SPECTRAL), axes=tuple(range(1, grid.n + 2)), norm="ortho")
    grad2 = np.abs(dl) ** 2 + np.sum(np.abs(grad_x) ** 2, axis=1)

    square = grad2 + np.abs(hd) ** 2 + np.abs(d) ** 2
    plain = np.sqrt(grad2) + np.abs(hd) + np.abs(d)

    xs = [int(round(c / grid.dx)) for c in np.atleast_1d(region.x)]
    it = int(round(region.t / grid.dt))

    def box(values, scale, shift):
        rows = np.flatnonzero(np.abs(nodes - lam) < scale * r)
        if not len(rows):
            raise error.DomainError("No transversal node inside the region", details="lam=%g r=%g" % (lam, r))

        rx = int(np.floor(scale * r / grid.dx))
        rt = int(np.floor((scale * r) ** 2 / grid.dt))
        index = [rows]
        index += [np.arange(c - rx, c + rx + 1) % grid.Nx for c in xs]
        index.append(np.arange(it + shift - rt + 1, it + shift + rt + 1) % grid.Nt if rt else np.array([(it + shift) % grid.Nt]))
        return float(np.mean(values[np.ix_(*index)]))

    lhs = np.sqrt(box(square, 1, 0))
    if lhs == 0:
        return 0.

    period = max(1, int(np.floor(grid.Lt / (4 * r ** 2))))
    step = int(round(2 * r ** 2 / grid.dt))
    rhs = 0.
    for k in range(-period, period + 1):
        weight = 1. if uniform_weights else 1. / (1 + abs(k) ** 1.5)
        rhs += weight * box(plain, 8, k * step)

    return float(lhs / rhs) if rhs > 0 else 0.


RellichBand = collections.namedtuple("RellichBand", ["trial_min", "trial_max", "mode_min", "mode_max"])


def rellich_ratio(A, fam, sample=20, rng=None):
    """
    Extremes of ||h_perp|| / ||h_r|| over random h in the chi+(PM) spectral
    subspace, and over the per-mode generators of that subspace.
    """
    if not A.is_constant or not A.has_structure("hermitian"):
        raise error.UsageError("Rellich ratios need constant Hermitian coefficients")

    rng = rng or np.random.default_rng(0)
    grid = fam.grid
    chi = fam.projectors.chi_plus

    ratios = []
    for i in range(sample):
        raw = rng.standard_normal((fam.d,) + grid.shape) + 1j * rng.standard_normal((fam.d,) + grid.shape)
        h = dirac.apply_matrices(chi, ConormalField(grid, raw, SPECTRAL))
        if h.norm() < RELLICH_MIN_NORM:
            continue

        perp = np.linalg.norm(h.values[0])
        rest = np.linalg.norm(h.values[1:])
        if rest > 0:
            ratios.append(perp / rest)

    columns = np.linalg.norm(chi, axis=-2)
    pick = np.argmax(columns, axis=-1)
    v = np.take_along_axis(chi, pick[..., None, None], axis=-1)[..., 0]
    norms = np.linalg.norm(v[..., 1:], axis=-1)
    valid = (np.linalg.norm(v, axis=-1) > RELLICH_MIN_NORM) & (norms > 0)
    mode = np.abs(v[..., 0])[valid] / norms[valid]

    if not ratios or not mode.size:
        raise error.DomainError("The chi+ subspace is trivial on this grid")

    return RellichBand(float(min(ratios)), float(max(ratios)), float(mode.min()), float(mode.max()))


OPERATORS = ("1+s_pp", "1-s_pp", "s_pr", "s_rp", "1+s_rr", "1-s_rr", "N_perp", "N_r")


class Diagnostics(object):
    """Infima and suprema of the weighted per-mode boundary operators at one regularity."""

    def __init__(self, s, floor, bounds, degenerate, layer_residual):
        self.s = s
        self.floor = floor
        self.bounds = bounds
        self.degenerate = degenerate
        self.layer_residual = layer_residual

    def __repr__(self):
        return "Diagnostics(s=%g, invertible=%s)" % (self.s, self.invertible)

    def infimum(self, name):
        return self.bounds[name][0]

    @property
    def invertible(self):
        return all(self.infimum(name) > self.floor for name in OPERATORS[:6])

    def verdicts(self):
        return {name: self.infimum(name) > self.floor for name in OPERATORS}

    def __json__(self):
        return {"s": self.s, "floor": self.floor, "degenerate": self.degenerate, "layer_residual": self.layer_residual,
                "bounds": {name: list(value) for name, value in self.bounds.items()}}


def _weighted_values(blocks, weight):
    """Per-mode gains of the six block operators and N_perp, N_r in the weighted norm."""
    pp, pr, rp, rr = blocks
    wpp, wpr, wrp, wrr = weight

    ep = np.sqrt(np.abs(wpp) ** 2 + np.abs(wrp) ** 2)
    er = np.sqrt(np.abs(wpr) ** 2 + np.abs(wrr) ** 2)

    # chi+ = (1 + sgn) / 2 in the reduced basis; its range is spanned by the larger column
    cp, cr = (1 + pp) / 2, rp / 2
    dp, dr = pr / 2, (1 + rr) / 2
    first = np.abs(cp) ** 2 + np.abs(cr) ** 2 >= np.abs(dp) ** 2 + np.abs(dr) ** 2
    vp, vr = np.where(first, cp, dp), np.where(first, cr, dr)

    full = np.sqrt(np.abs(wpp * vp + wpr * vr) ** 2 + np.abs(wrp * vp + wrr * vr) ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        return {
            "1+s_pp": np.abs(1 + pp),
            "1-s_pp": np.abs(1 - pp),
            "s_pr": np.abs(pr) * ep / er,
            "s_rp": np.abs(rp) * er / ep,
            "1+s_rr": np.abs(1 + rr),
            "1-s_rr": np.abs(1 - rr),
            "N_perp": np.abs(vp) * ep / full,
            "N_r": np.abs(vr) * er / full
        }


def _layer_sign_blocks(fam):
    traces = potentials.layer_trace_multipliers(fam)
    w, norm = dirac.reduced_direction(fam.grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        chi = [traces["dnu S0+"], -traces["dnu D0"] / (1j * norm), 1j * norm * traces["S0"], -traces["D0+"]]

    # sgn = 2 chi+ - 1 on the closure of ran(P)
    return 2 * chi[0] - 1, 2 * chi[1], 2 * chi[2], 2 * chi[3] - 1


def wellposedness_diagnostics(fam, s=-0.5, floor=1e-6):
    """
    Per-frequency gains of 1 +- s_pp, s_pr, s_rp, 1 +- s_rr and of the
    restrictions N_perp, N_r to the chi+ subspace, in the weights of the
    H^s_P scale, aggregated over the nonzero frequencies. The same blocks are
    assembled from the boundary layer traces and compared.
    """
    if not -1 <= s <= 0:
        raise error.UsageError("Sobolev order out of range", details="s=%g" % s)

    grid = fam.grid
    w, norm = dirac.reduced_direction(grid)
    nonzero = norm > 0

    blocks = potentials.reduced_sign_blocks(fam)
    weight = potentials.reduced_sign_blocks(fam, fam.matrix_function(dirac.bracket_power(s), "p"))
    layers = _layer_sign_blocks(fam)
    layer_residual = float(max(np.max(np.abs(a - b)[nonzero]) for a, b in zip(blocks, layers)))

    values = _weighted_values(blocks, weight)
    bounds = {}
    degenerate = 0
    for name in OPERATORS:
        v = values[name][nonzero]
        finite = np.isfinite(v)
        degenerate = max(degenerate, int(np.count_nonzero(~finite)))
        v = v[finite]
        bounds[name] = (float(v.min()), float(v.max())) if v.size else (0., 0.)

    if degenerate:
        logger.warning("%d degenerate frequencies at s=%g", degenerate, s)

    diag = Diagnostics(s, floor, bounds, degenerate, layer_residual)
    logger.debug("%r, layer residual %.2e", diag, layer_residual)
    return diag


def structural_verdicts(A, diag):
    """Whether every problem predicted well-posed from the structure of A has its infimum above the floor."""
    expected = dirac.structural_wellposedness(A, diag.s)
    names = {"R": "N_r", "N": "N_perp"}
    return {problem: diag.infimum(names[problem]) > diag.floor for problem in sorted(expected)}
