# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

"""
Tests for `paradirac.harness`.
"""

import numpy as np
import pytest

from paradirac import dirac, error, harness, potentials
from paradirac.spectral import ScalarField, geometric_nodes
from paradirac.suites import random_datum
from paradirac.utils import json


@pytest.fixture(scope='function')
def extension(heat, rng):
    """
    Random datum in ran(P) with its upper Cauchy extension on the default nodes.
    """
    h = random_datum(heat, rng)
    return h, potentials.cauchy_extension(h, heat, geometric_nodes())


def test_whitney_config():
    """
    Test `paradirac.harness.WhitneyConfig`.
    """
    cfg = harness.WhitneyConfig()
    assert (cfg.c0, cfg.c1, cfg.c2, cfg.c3) == (1., 2., 1., 1.)
    assert json.loads(json.dumps(cfg)) == {"c0": 1., "c1": 2., "c2": 1., "c3": 1.}

    wide = cfg.scaled(2., 3.)
    assert (wide.c2, wide.c3) == (2., 3.)

    for args in ((2., 1.), (0., 1.), (1., 2., 0.), (1., 2., 1., -1.)):
        with pytest.raises(error.UsageError):
            harness.WhitneyConfig(*args)


def test_whitney_box_radii(grid):
    """
    Test `paradirac.harness.WhitneyConfig.box_radii` capping.
    """
    cfg = harness.WhitneyConfig()

    assert cfg.box_radii(grid, 1e-3) == (0, 0)
    assert cfg.box_radii(grid, 1e3) == (grid.Nx // 2, grid.Nt // 2)
    assert cfg.box_sizes(grid, 1e3) == (grid.Nx, grid.Nt)


def test_square_function(heat, extension):
    """
    Test `paradirac.harness.square_function` against its closed form.
    """
    h, F = extension

    value = harness.square_function(F)
    exact = harness.square_function_closed_form(h, heat)
    assert value == pytest.approx(exact, rel=1e-4)

    weighted = harness.square_function(F, s=-0.5, derivative=False)
    assert weighted == pytest.approx(harness.square_function_closed_form(h, heat, s=-0.5, derivative=False), rel=1e-4)


def test_square_function_invalid(heat, extension):
    """
    Test `paradirac.harness.square_function` with invalid arguments.
    """
    h, F = extension

    with pytest.raises(error.UsageError):
        harness.square_function(potentials.cauchy_extension(h, heat, np.geomspace(0.1, 1., 8)))

    with pytest.raises(error.UsageError):
        harness.square_function(F, s=0.5)

    with pytest.raises(error.UsageError):
        harness.square_function_closed_form(h, heat, s=0., derivative=False)


def test_nontangential_maximal(extension):
    """
    Test `paradirac.harness.nontangential_maximal` and the sandwich bounds.
    """
    h, F = extension
    cfg = harness.WhitneyConfig()

    nt = harness.nontangential_maximal(F, cfg)
    assert np.all(nt.values.real >= 0)
    assert nt.norm() > 0

    sandwich = harness.sandwich_constants(F, cfg)
    assert sandwich.K1 == 1.
    assert sandwich.window_max <= sandwich.K1 * sandwich.maximal * (1 + 1e-12)
    assert sandwich.maximal <= sandwich.K2 * sandwich.integral * (1 + 1e-12)

    with pytest.raises(error.UsageError):
        harness.nontangential_maximal(F, harness.WhitneyConfig(1., 1e6))

    with pytest.raises(error.UsageError):
        harness.sandwich_constants(F, harness.WhitneyConfig(1., 1e6))


def test_whitney_trace_deviation(heat, rng):
    """
    Test `paradirac.harness.whitney_trace_deviation` shrinking with the first node.
    """
    h = random_datum(heat, rng, bandlimit=1)
    cfg = harness.WhitneyConfig()

    medians = []
    for lmin in (0.02, 0.01):
        F = potentials.semigroup_extension(h.value, heat, geometric_nodes(lmin, 2 ** 0.25, 1.))
        deviation = harness.whitney_trace_deviation(F, h.value, cfg)
        assert np.all(deviation.values.real >= 0)
        medians.append(float(np.median(deviation.values.real)))

    assert medians[1] < medians[0]

    with pytest.raises(error.UsageError):
        harness.whitney_trace_deviation(F, h.value, harness.WhitneyConfig(1., 1e6))


def test_reverse_holder_ratio(heat, rng):
    """
    Test `paradirac.harness.reverse_holder_ratio`.
    """
    A = dirac.CoefficientMatrix.identity(1)
    h = random_datum(heat, rng)
    F = potentials.cauchy_extension(h, heat, np.linspace(0.05, 8., 160))
    u = potentials.potential_reconstruct(F, A).profile

    region = harness.WhitneyRegion(3., 0.1, np.array([1.]), 1.)
    ratio = harness.reverse_holder_ratio(u, region)
    uniform = harness.reverse_holder_ratio(u, region, uniform_weights=True)
    assert np.isfinite(ratio)
    assert 0 <= uniform <= ratio

    with pytest.raises(error.UsageError):
        harness.reverse_holder_ratio(F, region)

    with pytest.raises(error.DomainError):
        harness.reverse_holder_ratio(u, harness.WhitneyRegion(3., 0.5, np.array([1.]), 1.))

    with pytest.raises(error.DomainError):
        harness.reverse_holder_ratio(u, harness.WhitneyRegion(7.5, 0.1, np.array([1.]), 1.))


def test_rellich_ratio(heat, rng):
    """
    Test `paradirac.harness.rellich_ratio`.
    """
    band = harness.rellich_ratio(dirac.CoefficientMatrix.identity(1), heat, 10, rng)
    assert band.trial_min > 1e-6
    assert band.trial_min <= band.trial_max
    assert band.mode_min <= band.mode_max

    with pytest.raises(error.UsageError):
        harness.rellich_ratio(dirac.CoefficientMatrix.random_elliptic(1, rng, hermitian=False), heat)

    with pytest.raises(error.UsageError):
        harness.rellich_ratio(dirac.CoefficientMatrix.random_elliptic(1, rng, hermitian=True, shape=(8, 8), cells=2), heat)


def test_wellposedness_diagnostics(grid, heat, rng):
    """
    Test `paradirac.harness.wellposedness_diagnostics`.
    """
    diag = harness.wellposedness_diagnostics(heat, -0.5, 1e-3)

    assert diag.layer_residual <= 1e-9
    assert diag.invertible
    assert set(diag.verdicts()) == set(harness.OPERATORS)
    assert all(harness.structural_verdicts(dirac.CoefficientMatrix.identity(1), diag).values())
    assert json.loads(json.dumps(diag))["s"] == -0.5

    block = dirac.CoefficientMatrix.random_elliptic(1, rng, structure="block")
    diag = harness.wellposedness_diagnostics(dirac.DiracSymbolFamily(grid, block), -1., 1e-3)
    for name in ("1+s_pp", "1-s_pp", "1+s_rr", "1-s_rr"):
        lower, upper = diag.bounds[name]
        assert 1 - 1e-10 <= lower <= upper <= 1 + 1e-10

    with pytest.raises(error.UsageError):
        harness.wellposedness_diagnostics(heat, 0.5)
