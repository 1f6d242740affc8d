# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

"""
Tests for `paradirac.dirac`.
"""

import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paradirac import dirac, error
from paradirac.dirac import CoefficientMatrix, DiracSymbolFamily
from paradirac.spectral import SPECTRAL, ConormalField, Grid, ScalarField
from paradirac.utils import json


def test_coefficient_matrix():
    """
    Test `paradirac.dirac.CoefficientMatrix` class.
    """
    A = CoefficientMatrix([[2., 1.], [0., 3.]], tags=("upper-triangular", "constant"))

    assert A.n == 1
    assert A.is_constant
    assert A.kappa <= 2.
    assert A.Cbound >= 3.
    assert A.perp_perp == 2.
    assert np.array_equal(A.perp_par, [1.])
    assert A.structure() == ("upper-triangular", "constant")
    assert not A.has_structure("block")
    assert np.array_equal(A.adjoint().entries, [[2., 0.], [1., 3.]])
    assert np.allclose(A - A.adjoint(), [[0., 1.], [-1., 0.]])
    assert np.array_equal(A.constant_value(), A.entries)

    identity = CoefficientMatrix.identity(2)
    assert identity.kappa == pytest.approx(1.)
    assert identity.structure() == ("block", "upper-triangular", "lower-triangular", "hermitian", "constant")

    mid = CoefficientMatrix.interpolate(CoefficientMatrix.identity(1), CoefficientMatrix.diagonal([3., 3.]), 0.5)
    assert np.allclose(mid.entries, 2 * np.eye(2))

    obj = json.loads(json.dumps(A))
    assert obj["n"] == 1 and obj["constant"] and obj["tags"] == ["upper-triangular", "constant"]


def test_coefficient_matrix_invalid():
    """
    Test `paradirac.dirac.CoefficientMatrix` class.

    With invalid coefficients and declarations.
    """
    with pytest.raises(error.UsageError):
        CoefficientMatrix([[1., 0., 0.], [0., 1., 0.]])

    with pytest.raises(error.UsageError):
        CoefficientMatrix([[1.]])

    with pytest.raises(error.DomainError):
        CoefficientMatrix(-np.eye(2))

    with pytest.raises(error.DomainError):
        CoefficientMatrix(np.eye(2), kappa=2.)

    with pytest.raises(error.DomainError):
        CoefficientMatrix(np.eye(2), Cbound=0.5)

    with pytest.raises(error.UsageError):
        CoefficientMatrix(np.eye(2), tags=("diagonal",))

    with pytest.raises(error.DomainError):
        CoefficientMatrix([[1., 0.5], [0.5, 1.]], tags=("block",))


def test_random_elliptic(rng):
    """
    Test `paradirac.dirac.CoefficientMatrix.random_elliptic`.
    """
    A = CoefficientMatrix.random_elliptic(2, rng)
    assert A.entries.shape == (3, 3)
    assert A.kappa >= 1 - 1e-10
    assert "constant" in A.tags

    H = CoefficientMatrix.random_elliptic(1, rng, hermitian=True)
    assert H.has_structure("hermitian")

    for structure in ("block", "upper-triangular", "lower-triangular"):
        S = CoefficientMatrix.random_elliptic(1, rng, structure=structure)
        assert S.has_structure(structure)
        assert S.kappa >= 0.75 - 1e-10

    rough = CoefficientMatrix.random_elliptic(1, rng, shape=(8, 8), cells=4)
    assert rough.entries.shape == (8, 8, 2, 2)
    assert not rough.is_constant
    assert np.array_equal(rough.entries[0, 0], rough.entries[1, 1])
    assert not np.array_equal(rough.entries[0, 0], rough.entries[2, 2])

    with pytest.raises(error.UsageError):
        rough.constant_value()

    with pytest.raises(error.UsageError):
        CoefficientMatrix.random_elliptic(1, rng, shape=(8, 8), cells=3)

    with pytest.raises(error.UsageError):
        CoefficientMatrix.random_elliptic(1, rng, structure="hermitian")


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1), n=st.integers(min_value=1, max_value=3))
def test_hat_involution_hypothesis(seed, n):
    """
    Test that `paradirac.dirac.hat_transform` is an involution.
    """
    A = CoefficientMatrix.random_elliptic(n, np.random.default_rng(seed))
    twice = dirac.hat_transform(dirac.hat_transform(A))

    assert np.max(np.abs(twice.entries - A.entries)) <= 1e-12 * max(1., np.max(np.abs(A.entries)))


def test_hat_transform():
    """
    Test `paradirac.dirac.hat_transform`.
    """
    A = CoefficientMatrix([[2., 1.], [0., 3.]], tags=("upper-triangular",))
    hat = dirac.hat_transform(A)

    assert np.allclose(hat.entries, [[0.5, -0.5], [0., 3.]])
    assert hat.tags == ("upper-triangular",)

    assert dirac.hat_transform(CoefficientMatrix([[1e-11, 0.], [0., 1.]])).entries[0, 0] == pytest.approx(1e11)

    with pytest.raises(error.DomainError):
        dirac.hat_transform(CoefficientMatrix([[1e-13, 0.], [0., 1.]]))

    sampled = np.array([np.eye(2), [[1e-13, 0.], [0., 1.]]])
    with pytest.raises(error.DomainError):
        dirac.hat_transform(CoefficientMatrix(sampled))


def test_coefficient_multiplier(rng):
    """
    Test `paradirac.dirac.coefficient_multiplier`.
    """
    m, N, mtilde = dirac.coefficient_multiplier(CoefficientMatrix.identity(1))
    assert np.allclose(m, np.eye(3))
    assert np.allclose(N, np.diag([-1., 1., 1.]))
    assert np.allclose(mtilde, np.eye(3))

    A = CoefficientMatrix.random_elliptic(1, rng)
    m, N, mtilde = dirac.coefficient_multiplier(A)
    assert np.allclose(m[:2, :2], dirac.hat_transform(A).entries)
    assert m[2, 2] == 1. and m[0, 2] == 0. and m[2, 0] == 0.

    with pytest.raises(error.UsageError):
        dirac.coefficient_multiplier(CoefficientMatrix.random_elliptic(1, rng, shape=(4, 4), cells=2))


def test_dirac_symbol_square(grid, heat):
    """
    Test that p^2 is (|xi|^2 + i tau) on the range of p.
    """
    p = dirac.dirac_symbol(grid)
    pi_ran = heat.matrix_function(dirac.ran_projector, "p")
    expected = (grid.xi_norm2 + 1j * grid.tau)[..., None, None] * pi_ran

    assert np.allclose(p @ p, expected, atol=1e-10)


def test_conormal_anticommutator(grid):
    """
    Test `paradirac.dirac.conormal_anticommutator`.
    """
    anti = dirac.conormal_anticommutator(grid)
    r = np.sqrt(np.abs(grid.tau))
    s = np.sign(grid.tau)

    assert np.allclose(anti[..., 0, 2], (1 + 1j * s) * r)
    assert np.allclose(anti[..., 2, 0], (1 - 1j * s) * r)

    rest = np.array(anti)
    rest[..., 0, 2] = rest[..., 2, 0] = 0.
    assert np.allclose(rest, 0.)


def test_reduced_direction(grid):
    """
    Test `paradirac.dirac.reduced_direction`.
    """
    w, norm = dirac.reduced_direction(grid)
    assert w.shape == grid.shape + (2,)
    assert np.allclose(np.linalg.norm(w, axis=-1), norm)

    wb, normb = dirac.reduced_direction(grid, backward=True)
    assert np.allclose(normb, norm)
    assert np.allclose(wb[..., 1], -1j * np.sqrt(np.abs(grid.tau)))


def test_holomorphic_functions():
    """
    Test the holomorphic function catalogue.
    """
    z = np.array([2. + 1j, -3. + 0.5j])

    assert np.allclose(dirac.sgn(z), [1., -1.])
    assert np.allclose(dirac.chi_plus(z), [1., 0.])
    assert np.allclose(dirac.chi_minus(z), [0., 1.])
    assert np.allclose(dirac.bracket_power(1)(z), [2. + 1j, 3. - 0.5j])
    assert np.allclose(dirac.exp_decay(1.)(np.array([-2.])), [np.exp(-2.)])
    assert np.allclose(dirac.cauchy(0., "lower")(z), [0., 1.])
    assert np.allclose(dirac.cauchy(1., "upper")(z), [np.exp(-2. - 1j), 0.])
    assert np.allclose(dirac.resolvent_function(1.)(np.array([1.])), [1. / (1 + 1j)])
    assert np.allclose(dirac.square_weight(2.)(np.array([1.])), [2. * np.exp(-2.)])

    assert dirac.exp_decay(1.).at_zero == 1.
    assert dirac.ran_projector.at_zero == 0.

    with pytest.raises(error.ConditioningError):
        dirac.sgn(np.array([1j]))


def test_symbol_family(grid, heat):
    """
    Test `paradirac.dirac.DiracSymbolFamily` class.
    """
    assert heat.d == 3
    assert np.allclose(heat.pm, heat.p)
    assert np.allclose(heat.matrix_function(dirac.identity), heat.pm, atol=1e-10)
    assert heat.operand("mp") is heat.mp

    # one positive eigenvalue away from the origin, none at it
    trace = np.trace(heat.projectors.chi_plus, axis1=-2, axis2=-1)
    zero = grid.zero_index()
    assert trace[zero] == pytest.approx(0.)
    assert np.allclose(np.delete(trace.ravel(), 0), 1.)

    backward = heat.adjoint_family()
    assert backward.backward
    assert np.allclose(backward.p, np.swapaxes(heat.p.conj(), -1, -2))
    assert not backward.adjoint_family().backward

    with pytest.raises(error.UsageError):
        heat.operand("pp")

    with pytest.raises(error.UsageError):
        DiracSymbolFamily(grid, CoefficientMatrix.identity(2))


@pytest.mark.parametrize("structure", ["general", "block", "upper-triangular", "lower-triangular"])
def test_projector_algebra(grid, rng, structure):
    """
    Test `paradirac.dirac.SpectralProjectorSet.algebra_residuals`.
    """
    fam = DiracSymbolFamily(grid, CoefficientMatrix.random_elliptic(1, rng, structure=structure))
    residuals = fam.spectral_residuals()

    assert set(residuals) == {"sum", "chi+ idempotent", "chi- idempotent", "chi+ chi-", "sgn^2"}
    assert max(residuals.values()) <= 1e-10
    assert fam.sector_angle() < np.pi / 2
    assert fam.resolvent_bound([0.1, 1., 10.]) >= 1 - 1e-12


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_projector_algebra_hypothesis(seed):
    """
    Test the projector algebra for arbitrary elliptic coefficients.
    """
    fam = DiracSymbolFamily(Grid(1, 4, 4), CoefficientMatrix.random_elliptic(1, np.random.default_rng(seed)))
    assert max(fam.spectral_residuals().values()) <= 1e-8


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1), n=st.integers(min_value=1, max_value=2))
def test_intertwining_hypothesis(seed, n):
    """
    Test p b(mp) = b(pm) p and mp = m pm m^-1 for arbitrary elliptic coefficients.
    """
    fam = DiracSymbolFamily(Grid(n, 4, 4), CoefficientMatrix.random_elliptic(n, np.random.default_rng(seed)))

    for b in (dirac.sgn, dirac.chi_plus, dirac.exp_decay(0.5)):
        assert fam.intertwining_residual(b) <= 1e-8

    residuals = fam.similarity_residuals()
    assert residuals["similarity"] <= 1e-10
    assert residuals["spectra"] <= 1e-8


def test_intertwining(heat):
    """
    Test `DiracSymbolFamily.intertwining_residual` and `similarity_residuals` on the heat family.
    """
    assert heat.intertwining_residual() <= 1e-12
    assert heat.intertwining_residual(dirac.ran_projector) <= 1e-12
    assert heat.similarity_residuals() == {"similarity": pytest.approx(0., abs=1e-14), "spectra": pytest.approx(0., abs=1e-12)}


def test_block_sign_diagonal(grid, rng):
    """
    Test that sgn(pm) has vanishing diagonal blocks for block coefficients.
    """
    proj = DiracSymbolFamily(grid, CoefficientMatrix.random_elliptic(1, rng, structure="block")).projectors

    assert np.max(np.abs(proj.s_pp)) <= 1e-10
    assert np.max(np.abs(proj.s_rr)) <= 1e-10
    assert proj.s_pr.shape == grid.shape + (2,)
    assert proj.chi("lower") is proj.chi_minus


def test_apply_matrices(grid, rng):
    """
    Test `paradirac.dirac.apply_matrices`.
    """
    field = ConormalField(grid, rng.standard_normal((3,) + grid.shape))
    eye = np.broadcast_to(np.eye(3), grid.shape + (3, 3))
    out = dirac.apply_matrices(eye, field)

    assert out.side == SPECTRAL
    assert np.allclose(out.values, field.as_spectral().values)

    swap = np.broadcast_to(np.eye(3)[[1, 0, 2]], grid.shape + (3, 3))
    assert np.allclose(dirac.apply_matrices(swap, field).perp.values, field.as_spectral().values[1])


def test_sobolev_scale_norm(grid, heat):
    """
    Test `paradirac.dirac.sobolev_scale_norm`.
    """
    zero = ScalarField.zeros(grid)
    h = ConormalField.from_components(ScalarField.pure_mode(grid, [2], 0), [zero], zero)

    # perp data at |xi| = 2 lie in ran(p), where [p] = 2
    assert dirac.sobolev_scale_norm(h, -1, heat, "P") == pytest.approx(h.norm() / 2)
    assert dirac.sobolev_scale_norm(h, -0.5, heat) == pytest.approx(h.norm() / np.sqrt(2))
    assert dirac.sobolev_scale_norm(h, 0, heat) == pytest.approx(h.norm())

    with pytest.raises(error.UsageError):
        dirac.sobolev_scale_norm(h, 0.5, heat)

    with pytest.raises(error.UsageError):
        dirac.sobolev_scale_norm(h, -0.5, heat, "Q")

    bad = ConormalField.from_components(zero, [zero], ScalarField.pure_mode(grid, [1], 0))
    with pytest.raises(error.DomainError):
        dirac.sobolev_scale_norm(bad, -0.5, heat)


def test_lipschitz_slope(rng):
    """
    Test `paradirac.dirac.lipschitz_slope`.
    """
    grid = Grid(1, 4, 4)
    A0 = CoefficientMatrix.identity(1)
    A1 = CoefficientMatrix.random_elliptic(1, rng)

    assert dirac.lipschitz_slope(A0, A0, grid, samples=2) == 0.
    assert 0 < dirac.lipschitz_slope(A0, A1, grid, samples=4) < 1e6


def test_structural_wellposedness(rng):
    """
    Test `paradirac.dirac.structural_wellposedness`.
    """
    shape = (4, 4)
    upper = CoefficientMatrix.random_elliptic(1, rng, structure="upper-triangular", shape=shape, cells=2)
    lower = CoefficientMatrix.random_elliptic(1, rng, structure="lower-triangular", shape=shape, cells=2)
    block = CoefficientMatrix.random_elliptic(1, rng, structure="block", shape=shape, cells=2)
    general = CoefficientMatrix.random_elliptic(1, rng, shape=shape, cells=2)

    assert dirac.structural_wellposedness(CoefficientMatrix.random_elliptic(1, rng), -1) == {"R", "N"}
    assert dirac.structural_wellposedness(block, 0) == {"R", "N"}
    assert dirac.structural_wellposedness(general, -0.5) == {"R", "N"}
    assert dirac.structural_wellposedness(general, 0) == set()
    assert dirac.structural_wellposedness(upper, 0) == {"R"}
    assert dirac.structural_wellposedness(upper, -1) == {"N"}
    assert dirac.structural_wellposedness(lower, 0) == {"N"}
    assert dirac.structural_wellposedness(lower, -1) == {"R"}

    with pytest.raises(error.UsageError):
        dirac.structural_wellposedness(general, 0.5)


def test_dump_symbol_family(grid, heat):
    """
    Test `paradirac.dirac.dump_symbol_family`.
    """
    stream = io.BytesIO()
    dirac.dump_symbol_family(stream, heat)

    assert len(stream.getvalue()) == 9 * (32 + 16 * grid.size)


def test_resolvent(heat):
    """
    Test `paradirac.dirac.DiracSymbolFamily.resolvent`.
    """
    for lam in (-2., 0.1, 3.):
        inv = heat.resolvent(lam)
        identity = np.broadcast_to(np.eye(heat.d), inv.shape)
        assert np.allclose((np.eye(heat.d) + 1j * lam * heat.pm) @ inv, identity, atol=1e-10)


def test_spectral_projectors(heat):
    """
    Test `paradirac.dirac.spectral_projectors` against the cached set.
    """
    proj = dirac.spectral_projectors(heat)

    assert np.allclose(proj.chi_plus, heat.projectors.chi_plus)
    assert np.allclose(proj.sgn, proj.chi_plus - proj.chi_minus)
    assert np.allclose(proj.chi_plus + proj.chi_minus, proj.pi_ran, atol=1e-10)
