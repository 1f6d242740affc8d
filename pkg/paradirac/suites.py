# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

"""
Verification suites.

Each suite method is registered as a CLI subcommand (category "suite") and
returns a `VerificationReport`. Suites draw their randomness from a
generator seeded by the run seed and the suite name only.
"""

import io
import os
import zlib

import numpy as np

from paradirac import baseline as baseline_mod
from paradirac import cli, config, dirac, energy, error, fractime, harness, kato, log, potentials, registrar, report
from paradirac.spectral import SPECTRAL, ConormalField, Grid, ScalarField, geometric_nodes, write_profile


logger = log.get_logger(__name__)

SUITES = ("calculus", "layers", "energy", "kato", "estimates", "diagnostics")


class SuiteContext(object):
    """Settings, seed, baseline and grid factories shared by the suites of one run."""

    def __init__(self, settings, seed=None, quick=False, baseline=None, slack=None, freeze=False):
        self.settings = settings
        self.seed = settings.seed if seed is None else int(seed)
        self.quick = quick
        self.baseline = baseline or baseline_mod.Baseline()
        self.slack = settings.slack if slack is None else slack
        self.freeze = freeze

    def rng(self, suite):
        return np.random.default_rng([self.seed, zlib.crc32(suite.encode("utf8"))])

    @property
    def trials(self):
        return min(self.settings.trials, 10) if self.quick else self.settings.trials

    def count(self, full, quick=1):
        return quick if self.quick else full

    def grid(self, n=None, size=None):
        n = self.settings.n if n is None else n
        nx = size or (8 if self.quick else self.settings.Nx)
        nt = size or (8 if self.quick else self.settings.Nt)
        return Grid(n, nx, nt, self.settings.Lx)

    def nodes(self, lambda_min=None):
        s = self.settings
        return geometric_nodes(lambda_min or s.lambda_min, s.ratio, s.lambda_max)

    def slab(self, grid):
        s = self.settings
        if self.quick:
            return energy.DiscreteSlab(grid, s.Lambda, max(16, s.Nlambda // 2))

        return energy.DiscreteSlab(grid, s.Lambda, s.Nlambda)

    def whitney(self):
        return harness.WhitneyConfig(*self.settings.whitney)

    def environment(self, suite):
        s = self.settings
        return {
            "suite": suite,
            "seed": self.seed,
            "quick": self.quick,
            "grid": {"n": s.n, "Nx": s.Nx, "Nt": s.Nt, "Lx": s.Lx},
            "slab": {"Lambda": s.Lambda, "Nlambda": s.Nlambda},
            "whitney": list(s.whitney),
            "profile": {"lambda_min": s.lambda_min, "lambda_max": s.lambda_max, "ratio": s.ratio}
        }

    def calibrated(self, rep, name, value, provenance="calibrated"):
        """
        Check against the frozen band. Without a band the check only passes
        while the run is freezing the baseline.
        """
        band = self.baseline.band(name, self.slack)
        if band is None:
            if not self.freeze:
                logger.warning("%s: no frozen band, rerun with --freeze-baseline", name)

            return rep.add(name, value, verdict=self.freeze, provenance=provenance)

        return rep.add(name, value, band, verdict=self.baseline.contains(name, value, self.slack), provenance=provenance)


def random_datum(fam, rng, bandlimit=2, side="upper"):
    """Random band-limited conormal datum in the closure of ran(P)."""
    grid = fam.grid
    components = [ScalarField.random(grid, rng, SPECTRAL, bandlimit=bandlimit).values for i in range(fam.d)]
    field = ConormalField(grid, np.stack(components), SPECTRAL)
    value = dirac.apply_matrices(fam.matrix_function(dirac.ran_projector, "p"), field)
    return potentials.BoundaryDatum(value, side=side)


def random_scalar(grid, rng, bandlimit=2, mean_free=True):
    field = ScalarField.random(grid, rng, SPECTRAL, bandlimit=bandlimit)
    values = np.array(field.values)
    if mean_free:
        values[grid.zero_index()] = 0.

    return ScalarField(grid, values, SPECTRAL)


def _mode_index(grid, k=1, m=0):
    return (k % grid.Nx,) * grid.n + (m % grid.Nt,)


def _coefficients(ctx, rng, count, **kwargs):
    return [dirac.CoefficientMatrix.identity(ctx.settings.n)] + \
        [dirac.CoefficientMatrix.random_elliptic(ctx.settings.n, rng, **kwargs) for i in range(count)]


def _relative(a, b):
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), np.finfo(float).tiny))


class VerificationSuites(registrar.DelayedRegistrar):
    @cli.register("calculus", "suite", help="calculus: functional calculus of the Dirac symbol")
    def calculus(self, ctx):
        rng = ctx.rng("calculus")
        rep = report.VerificationReport("calculus", ctx.environment("calculus"))

        worst = 0.
        for i in range(ctx.trials):
            A = dirac.CoefficientMatrix.random_elliptic(int(rng.integers(1, 3)), rng)
            worst = max(worst, float(np.max(np.abs(dirac.hat_transform(dirac.hat_transform(A)).entries - A.entries))))

        rep.add("hat involution", worst, (0., 1e-12))

        grid = ctx.grid(size=8 if ctx.quick else 32)
        fam = dirac.DiracSymbolFamily(grid)
        pi_ran = fam.matrix_function(dirac.ran_projector, "p")
        expected = (grid.xi_norm2 + 1j * grid.tau)[..., None, None] * pi_ran
        rep.add("symbol square", _relative(fam.p @ fam.p, expected), (0., 1e-10))

        grid = ctx.grid()
        for j, A in enumerate(_coefficients(ctx, rng, ctx.count(10, 2))):
            fam = dirac.DiracSymbolFamily(grid, A)
            residuals = fam.spectral_residuals()
            rep.add("projector algebra %d" % j, max(residuals.values()), (0., 1e-10))
            rep.add("intertwining %d" % j, fam.intertwining_residual(), (0., 1e-10))
            similarity = fam.similarity_residuals()
            rep.add("similarity %d" % j, similarity["similarity"], (0., 1e-10))
            rep.add("similar spectra %d" % j, similarity["spectra"], (0., 1e-8))
            rep.add("sector angle %d" % j, fam.sector_angle(), (0., np.pi / 2))
            rep.add("resolvent bound %d" % j, fam.resolvent_bound([0.1, 1., 10.]), (1., 1e8))

        block = dirac.CoefficientMatrix.random_elliptic(ctx.settings.n, rng, structure="block")
        proj = dirac.DiracSymbolFamily(grid, block).projectors
        rep.add("block diagonal vanishing", max(float(np.max(np.abs(proj.s_pp))), float(np.max(np.abs(proj.s_rr)))), (0., 1e-10),
                provenance="theorem")

        A0, A1 = _coefficients(ctx, rng, 1)
        rep.add("sgn lipschitz slope", dirac.lipschitz_slope(A0, A1, ctx.grid(size=8), samples=ctx.count(8, 4)), (0., 1e6))

        dt = 4. / 512
        t = np.arange(512) * dt
        v = np.exp(-((t - 2.) / 0.3) ** 2)
        for variant in ("plain", "hilbert"):
            kernel = fractime.half_derivative_kernel_apply(v, dt, variant)
            spectral = fractime.half_derivative_sequence(v, dt, variant)
            inner = slice(64, 448)
            rep.add("half derivative backends %s" % variant, _relative(kernel[inner], spectral[inner]), (0., 1e-3))

        line = np.exp(-(t - 2.) ** 2 * 40)
        far = fractime.half_derivative_kernel_apply(line, dt)
        tail = slice(352, 480)
        slope = np.polyfit(np.log(np.abs(t[tail] - 2.)), np.log(np.abs(far[tail])), 1)[0]
        rep.add("far field decay exponent", -slope, (1.3, 1.7), provenance="theorem")

        g = np.exp(-(t - 2.) ** 2) * np.cos(3 * (t - 2.))
        norm = np.sqrt(np.sum(np.abs(g) ** 2) * dt)
        centered, v1, v2 = fractime.riesz_half_split(g, dt, origin=256)
        with np.errstate(divide="ignore", invalid="ignore"):
            growth = np.abs(v1) / (np.abs(centered) ** 0.25 * norm)

        rep.add("riesz low frequency growth", float(np.max(growth[np.isfinite(growth)])), (0., 4.), provenance="supplement")
        rep.add("riesz high frequency mass", float(np.sqrt(np.sum(np.abs(v2) ** 2) * dt) / norm), (0., 1.), provenance="supplement")

        poincare = []
        for trial in range(ctx.count(20, 4)):
            h = np.cumsum(rng.standard_normal(512)) * dt
            poincare.append(fractime.fractional_poincare_ratio(h, (248, 264), dt=dt))
            poincare.append(fractime.fractional_poincare_ratio(h, (248, 264), q=1.5, dt=dt, form="translates"))

        ctx.calibrated(rep, "fractional poincare ratio", poincare)
        return rep

    @cli.register("layers", "suite", help="layers: layer potentials, jump relations, DtN maps and Green formulas")
    def layers(self, ctx):
        rng = ctx.rng("layers")
        rep = report.VerificationReport("layers", ctx.environment("layers"))
        grid = ctx.grid()
        nodes = np.geomspace(0.05, 4., ctx.count(12, 6))

        oracle_worst = 0.
        for j, A in enumerate(_coefficients(ctx, rng, ctx.count(5, 1))):
            fam = dirac.DiracSymbolFamily(grid, A)
            traces = potentials.layer_trace_multipliers(fam)
            w, norm = dirac.reduced_direction(grid)
            nz = norm > 0

            rep.add("single layer jump %d" % j, float(np.max(np.abs(traces["S0 jump"]))), (0., 1e-10), provenance="theorem")
            rep.add("conormal jump %d" % j, float(np.max(np.abs((traces["dnu S0+"] - traces["dnu S0-"] - 1)[nz]))), (0., 1e-10),
                    provenance="theorem")
            rep.add("double layer jump %d" % j, float(np.max(np.abs((traces["D0+"] - traces["D0-"] + 1)[nz]))), (0., 1e-10),
                    provenance="theorem")
            rep.add("layer sign representation %d" % j, potentials.layer_sign_residual(fam), (0., 1e-9))

            f = random_scalar(grid, rng)
            for kind in ("single", "double"):
                rep.add("%s layer cauchy %d" % (kind, j), potentials.layer_cauchy_residual(f, fam, nodes, kind), (0., 1e-8))

            dtn = potentials.dtn_operators(fam)
            rep.add("dtn factorizations %d" % j, max(dtn.residuals().values()), (0., 1e-8))

            u0 = random_scalar(grid, rng)
            datum = dtn.dirichlet_datum(u0)
            u = potentials.potential_reconstruct(potentials.cauchy_extension(potentials.BoundaryDatum(datum), fam, nodes), A).profile
            green = potentials.greens_reconstruct(u0, datum.perp, fam, nodes)
            zero = grid.zero_index()
            error_ = max(_relative(np.delete(a.as_spectral().values.ravel(), 0), np.delete(b.as_spectral().values.ravel(), 0))
                         for a, b in zip(green.fields, u.fields))
            rep.add("green reconstruction %d" % j, error_, (0., 1e-6), provenance="theorem")

            for trial in range(ctx.count(20, 4)):
                index = tuple(int(i) for i in rng.integers(0, grid.Nx, grid.n)) + (int(rng.integers(0, grid.Nt)),)
                if index == zero or not dtn.mask[index]:
                    continue

                xi, tau = grid.frequency(index)
                mode = potentials.per_mode_bvp_oracle(A, xi, tau)
                oracle_worst = max(oracle_worst, abs(dtn.dn_plus[index] * 1j * norm[index] - mode.dtn) / abs(mode.dtn))
                ratio = traces["dnu S0+"][index] / traces["S0"][index]
                oracle_worst = max(oracle_worst, abs(ratio - mode.dtn) / abs(mode.dtn))

                coeff = np.zeros(grid.shape, dtype=complex)
                coeff[index] = 1.
                pure = ScalarField(grid, coeff, SPECTRAL)
                ext = potentials.potential_reconstruct(
                    potentials.cauchy_extension(potentials.BoundaryDatum(dtn.dirichlet_datum(pure)), fam, nodes), A).profile
                line = np.array([f.as_spectral().values[index] for f in ext.fields])
                oracle_worst = max(oracle_worst, _relative(line, mode.evaluate(nodes)))

            g = random_scalar(grid, rng)
            rep.add("single layer duality %d" % j, potentials.single_layer_duality_residual(fam, f, g, 0.7), (0., 1e-8))
            rep.add("double layer duality %d" % j, potentials.double_layer_duality_residual(fam, f, g, 0.7), (0., 1e-8))
            rep.add("abstract green formula %d" % j, potentials.abstract_green_residual(fam, u0, g), (0., 1e-8), provenance="theorem")

        rep.add("oracle equivalence", oracle_worst, (0., 1e-8))

        fam = dirac.DiracSymbolFamily(grid)
        f = ScalarField.pure_mode(grid, [1] * grid.n, 0)
        symbol = potentials.whole_space_symbol(fam)
        errors = []
        for eps, R in ((1e-3, 1e2), (1e-5, 1e3)):
            inv = potentials.inverse_whole_space(f, fam, eps, R)
            back = ScalarField(grid, symbol * inv.as_spectral().values, SPECTRAL)
            errors.append((back + f.as_spectral()).norm() / f.norm())

        rep.add("whole space inversion", errors[-1], (0., 1e-4), provenance="theorem")
        rep.add("whole space widening", errors[0] - errors[-1], (0., None))
        return rep

    @cli.register("energy", "suite", help="energy: hidden coercivity and energy solutions on the slab")
    def energy(self, ctx):
        rng = ctx.rng("energy")
        rep = report.VerificationReport("energy", ctx.environment("energy"))
        s = ctx.settings
        grid = ctx.grid(size=8)
        slab = ctx.slab(grid)
        trials = ctx.count(100, 10)

        heat = dirac.CoefficientMatrix.identity(s.n)
        rough = [dirac.CoefficientMatrix.random_elliptic(s.n, rng, shape=grid.shape, cells=4) for i in range(ctx.count(10, 1))]
        for j, A in enumerate([heat] + rough):
            delta = s.delta or energy.default_delta(A)
            rep.add("coercivity margin %d" % j, energy.coercivity_margin(A, slab, delta, trials, rng), (-1e-10, None),
                    provenance="theorem")

        f = ScalarField.pure_mode(grid, [1] * s.n, 0)
        index = _mode_index(grid)
        solution = energy.solve_energy_bvp(heat, slab, s.delta, neumann=f, dense_max=s.dense_max, gmres_factor=s.gmres_factor)
        rep.add("neumann weak residual", solution.residual, (0., energy.WEAK_RESIDUAL_TOL))

        xi, tau = grid.frequency(index)
        coeff = f.as_spectral().values[index]
        mode = potentials.per_mode_bvp_oracle(heat, xi, tau, "neumann", coeff)
        line = np.fft.fftn(solution.values, axes=tuple(range(1, s.n + 2)), norm="ortho")[(slice(None),) + index]
        rep.add("neumann oracle", _relative(line[:-1], mode.evaluate(slab.nodes[:-1])), (0., 1e-2))

        A = rough[0]
        g = random_scalar(grid, rng, mean_free=False).as_physical()
        form = energy.assemble_delta_form(A, slab, s.delta or energy.default_delta(A))
        dirichlet = energy.solve_energy_bvp(A, slab, form.delta, dirichlet=g, dense_max=s.dense_max, gmres_factor=s.gmres_factor)
        conormal = energy.discrete_conormal(form, dirichlet.values)
        neumann = energy.solve_energy_bvp(A, slab, form.delta, neumann=conormal, dense_max=s.dense_max, gmres_factor=s.gmres_factor)
        rep.add("dirichlet neumann consistency", _relative(neumann.values, dirichlet.values), (0., 1e-2), provenance="theorem")

        fam = dirac.DiracSymbolFamily(grid)
        datum = random_datum(fam, rng)
        F = potentials.cauchy_extension(datum, fam, slab.nodes[1:])
        ctx.calibrated(rep, "energy estimate ratio", energy.energy_estimate_ratio(F, datum.value, fam))
        return rep

    @cli.register("kato", "suite", help="kato: square roots of dense parabolic operators")
    def kato(self, ctx):
        rng = ctx.rng("kato")
        rep = report.VerificationReport("kato", ctx.environment("kato"))
        s = ctx.settings
        trials = ctx.count(100, 10)

        grid = Grid(s.n, 8, 8, s.Lx)
        heat = kato.assemble_parabolic_L(dirac.CoefficientMatrix.identity(s.n), grid, s.kato_max)
        ratios = kato.kato_sqrt_ratio(heat, trials, rng)
        rep.add("sqrt residual heat", ratios.residual, (0., 1e-8))
        rep.add("kato band heat", [ratios.minimum, ratios.maximum], (2 ** -0.25 - 0.02, 1.02))

        drifts = []
        for j in range(ctx.count(10, 1)):
            A = dirac.CoefficientMatrix.random_elliptic(s.n, rng, hermitian=False, shape=grid.shape, cells=4)
            L = kato.assemble_parabolic_L(A, grid, s.kato_max)
            rep.add("accretivity margin %d" % j, L.accretivity_margin(trials, rng), (-1e-10, None))
            coarse = kato.kato_sqrt_ratio(L, trials, rng)
            rep.add("sqrt residual %d" % j, coarse.residual, (0., 1e-8))
            rep.add("kato lower %d" % j, coarse.minimum, (0.05, None))
            ctx.calibrated(rep, "kato band rough %d" % j, [coarse.minimum, coarse.maximum])

            if not ctx.quick:
                fine_grid = Grid(s.n, 12, 12, s.Lx)
                fine = _refine_cells(A, grid, fine_grid)
                refined = kato.kato_sqrt_ratio(kato.assemble_parabolic_L(fine, fine_grid, s.kato_max), trials, rng)
                drifts.append(abs(refined.minimum - coarse.minimum) / coarse.minimum)

        if drifts:
            rep.add("kato refinement drift", max(drifts), (0., 0.2))

        return rep

    @cli.register("estimates", "suite", help="estimates: square functions, maximal functions, reverse Hoelder and Rellich ratios")
    def estimates(self, ctx):
        rng = ctx.rng("estimates")
        rep = report.VerificationReport("estimates", ctx.environment("estimates"))
        s = ctx.settings
        grid = ctx.grid(size=8)
        nodes = ctx.nodes()
        cfg = ctx.whitney()

        sf_error, sf_ratio, nt_ratio, robust = 0., [], [], 0.
        for j, A in enumerate(_coefficients(ctx, rng, ctx.count(3, 1))):
            fam = dirac.DiracSymbolFamily(grid, A)
            for trial in range(ctx.count(20, 3)):
                h = random_datum(fam, rng)
                F = potentials.cauchy_extension(h, fam, nodes)

                value = harness.square_function(F)
                exact = harness.square_function_closed_form(h, fam)
                sf_error = max(sf_error, abs(value - exact) / max(exact, np.finfo(float).tiny))

                projected = dirac.apply_matrices(fam.projectors.chi_plus, h.value).norm() ** 2
                if projected > 0:
                    sf_ratio.append(value / projected)

                nt = harness.nontangential_maximal(F, cfg).norm()
                nt_ratio.append(nt / h.value.norm())

                sandwich = harness.sandwich_constants(F, cfg)
                rep.add("sandwich lower %d.%d" % (j, trial), sandwich.K1 * sandwich.maximal - sandwich.window_max,
                        (-1e-12 * sandwich.maximal, None), provenance="theorem")
                rep.add("sandwich upper %d.%d" % (j, trial), sandwich.K2 * sandwich.integral - sandwich.maximal,
                        (-1e-12 * sandwich.maximal, None), provenance="theorem")

                wide = harness.nontangential_maximal(F, cfg.scaled(2., 2.)).norm()
                robust = max(robust, wide / nt, nt / wide)

        rep.add("square function closed form", sf_error, (0., 1e-6))
        ctx.calibrated(rep, "square function ratio", sf_ratio)
        ctx.calibrated(rep, "nontangential ratio", nt_ratio)
        rep.add("whitney robustness", robust, (1., 4.))

        fam = dirac.DiracSymbolFamily(grid)
        smooth = random_datum(fam, rng, bandlimit=1)
        medians = []
        for lmin in (0.02, 0.01):
            local = geometric_nodes(lmin, s.ratio, 1.)
            F = potentials.semigroup_extension(smooth.value, fam, local)
            medians.append(float(np.median(harness.whitney_trace_deviation(F, smooth.value, cfg).values.real)))

        rep.add("whitney trace convergence", medians[0] / max(medians[1], np.finfo(float).tiny), (2., None), provenance="theorem")

        heat_max = self._reverse_holder(ctx, rng, dirac.CoefficientMatrix.identity(s.n), grid)
        ctx.calibrated(rep, "reverse holder heat", heat_max)
        for j, A in enumerate(_coefficients(ctx, rng, ctx.count(3, 1))[1:]):
            rep.add("reverse holder %d" % j, self._reverse_holder(ctx, rng, A, grid), (0., 10 * heat_max), provenance="theorem")

        for j, A in enumerate([dirac.CoefficientMatrix.identity(s.n)] +
                              [dirac.CoefficientMatrix.random_elliptic(s.n, rng, hermitian=True) for i in range(ctx.count(3, 1))]):
            band = harness.rellich_ratio(A, dirac.DiracSymbolFamily(grid, A), ctx.count(20, 5), rng)
            rep.add("rellich lower %d" % j, band.trial_min, (1e-6, None), provenance="theorem")
            ctx.calibrated(rep, "rellich band %d" % j, [band.mode_min, band.mode_max])

        return rep

    def _reverse_holder(self, ctx, rng, A, grid):
        fam = dirac.DiracSymbolFamily(grid, A)
        nodes = np.linspace(0.05, ctx.settings.Lambda, 160)
        worst = 0.
        for trial in range(ctx.count(50, 5)):
            h = random_datum(fam, rng)
            u = potentials.potential_reconstruct(potentials.cauchy_extension(h, fam, nodes), A).profile
            lam = rng.uniform(2., 4.)
            r = rng.uniform(0.05, min(lam / 10., grid.Lx / 20.))
            x = rng.uniform(0., grid.Lx, grid.n)
            t = rng.uniform(0., grid.Lt)
            worst = max(worst, harness.reverse_holder_ratio(u, harness.WhitneyRegion(lam, r, x, t)))

        return worst

    @cli.register("diagnostics", "suite", help="diagnostics: invertibility of the boundary operators per regularity")
    def diagnostics(self, ctx):
        rng = ctx.rng("diagnostics")
        rep = report.VerificationReport("diagnostics", ctx.environment("diagnostics"))
        s = ctx.settings
        grid = ctx.grid()

        cases = [("heat", dirac.CoefficientMatrix.identity(s.n))]
        for structure in ("block", "upper-triangular", "lower-triangular", "general"):
            cases.append((structure, dirac.CoefficientMatrix.random_elliptic(s.n, rng, structure=structure)))

        for name, A in cases:
            fam = dirac.DiracSymbolFamily(grid, A)
            for reg in s.regularities:
                diag = harness.wellposedness_diagnostics(fam, reg, s.floor)
                tag = "%s s=%g" % (name, reg)
                rep.add("layer cross-check %s" % tag, diag.layer_residual, (0., 1e-9))
                rep.add("structural verdicts %s" % tag, [diag.infimum(op) for op in harness.OPERATORS], verdict=all(harness.structural_verdicts(A, diag).values()))

                if reg == -0.5:
                    rep.add("energy line invertibility %s" % tag, [diag.infimum(op) for op in harness.OPERATORS[:6]],
                            verdict=diag.invertible, provenance="theorem")

                if name == "heat":
                    rep.add("heat off-diagonal %s" % tag, [diag.infimum("s_pr"), diag.infimum("s_rp")], (s.floor, None))

                if name == "block":
                    rep.add("block diagonal gains %s" % tag,
                            [diag.bounds[op] for op in ("1+s_pp", "1-s_pp", "1+s_rr", "1-s_rr")], (1 - 1e-10, 1 + 1e-10),
                            provenance="theorem")

        return rep

    @cli.register("snapshot", "dump", help="snapshot: dump the symbol family and a Cauchy extension profile")
    def snapshot(self, ctx, out):
        rep = report.VerificationReport("snapshot", ctx.environment("snapshot"))
        fam = dirac.DiracSymbolFamily(ctx.grid())

        path = os.path.join(out, "symbol-pm.bin")
        with io.open(path, "wb") as f:
            dirac.dump_symbol_family(f, fam)

        rep.add("symbol snapshot bytes", os.path.getsize(path), verdict=True, provenance="supplement")

        h = random_datum(fam, ctx.rng("snapshot"))
        path = os.path.join(out, "cauchy-profile.bin")
        with io.open(path, "wb") as f:
            write_profile(f, potentials.cauchy_extension(h, fam, ctx.nodes()))

        rep.add("profile snapshot bytes", os.path.getsize(path), verdict=True, provenance="supplement")
        return rep


def _refine_cells(A, coarse, fine):
    """Resample piecewise constant coefficients on a refinement with the same cells."""
    cells = 4
    entries = A.entries
    for axis, size in enumerate(coarse.shape):
        entries = np.take(entries, np.arange(cells) * (size // cells), axis=axis)

    for axis, size in enumerate(fine.shape):
        entries = np.repeat(entries, size // cells, axis=axis)

    return dirac.CoefficientMatrix(entries)


_suites = None


def load_suites():
    global _suites

    if _suites is None:
        _suites = VerificationSuites()

    return _suites


def run_suite(name, ctx, logs=None):
    load_suites()
    entry = cli.get(name).get("suite")
    if not entry:
        raise error.UsageError("Unknown suite", details=name)

    method, help, options = entry
    if logs:
        logs.context = name
        logs.info("suite started, seed %d%s" % (ctx.seed, " (quick)" if ctx.quick else ""))

    try:
        rep = method(ctx)
    except error.ParaDiracError as e:
        if logs:
            logs.log(e.log_priority, e)
        raise

    logger.debug("suite %s: %d checks, %d failed", name, len(rep.checks), len(rep.failures))
    if logs:
        logs.info("suite finished, %d checks, %d failed" % (len(rep.checks), len(rep.failures)))
        logs.context = None

    return rep


def _open(config_path):
    conf = config.Config(config_path)
    return conf, config.load_settings(conf), log.Log(conf.log)


def run_report(config_path=None, suites=None, seed=None, quick=False, out=None, format="json", baseline_file=None, freeze=False):
    """
    Run the selected suites (default: the `[run] suites` list of the
    configuration) and write the reports to `out`. Returns the reports and
    the exit code: 0 when every verdict passes, 1 otherwise.
    """
    if format not in ("json", "csv", "both"):
        raise error.UsageError("Unknown report format", details=format)

    conf, settings, logs = _open(config_path)
    try:
        names = settings.suites if suites is None else suites
        for name in names:
            if name not in SUITES:
                raise error.UsageError("Unknown suite", details=name)

        filename = baseline_file or settings.baseline_file
        if filename and not os.path.isabs(filename):
            filename = os.path.join(conf.basedir, filename)

        frozen = baseline_mod.load(filename)
        ctx = SuiteContext(settings, seed, quick, frozen, freeze=freeze)
        reports = [run_suite(name, ctx, logs) for name in names]

        if freeze:
            frozen.freeze(reports)
            frozen.save()

        if out and reports:
            if not os.path.isdir(out):
                os.makedirs(out)

            if format in ("json", "both"):
                document = reports[0].to_dict() if len(reports) == 1 else report.merge(reports)
                report.write_json(os.path.join(out, "report.json"), document)

            if format in ("csv", "both"):
                report.write_csv(os.path.join(out, "report.csv"), reports)
    finally:
        logs.close()

    return reports, 0 if all(r.passed for r in reports) else 1


def run_snapshot(config_path=None, out=".", seed=None, quick=False):
    """Write the binary snapshots of the `snapshot` command into `out`."""
    conf, settings, logs = _open(config_path)
    try:
        if not os.path.isdir(out):
            os.makedirs(out)

        load_suites()
        method, help, options = cli.get("snapshot")["dump"]
        return method(SuiteContext(settings, seed, quick), out)
    finally:
        logs.close()
