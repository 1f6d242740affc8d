# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

"""
Tests for `paradirac.fractime`.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paradirac import error, fractime
from paradirac.spectral import SPECTRAL, Grid, ScalarField


def _gaussian(count=512, dt=4. / 512, center=2., width=0.3):
    t = np.arange(count) * dt
    return t, np.exp(-((t - center) / width) ** 2)


def test_half_derivative(grid):
    """
    Test `paradirac.fractime.half_derivative`.
    """
    mode = ScalarField.pure_mode(grid, [1], -2)
    tau = -2 * 2 * np.pi / grid.Lt

    plain = fractime.half_derivative(mode)
    assert np.allclose(plain.values, np.sqrt(abs(tau)) * mode.values)

    hilbert = fractime.half_derivative(mode, "hilbert")
    assert np.allclose(hilbert.values, -1j * np.sqrt(abs(tau)) * mode.values)

    with pytest.raises(error.UsageError):
        fractime.half_derivative(mode, "riesz")


def test_half_derivative_composition(grid, rng):
    """
    Test that H D^(1/2) D^(1/2) is the time derivative.
    """
    field = ScalarField.random(grid, rng, SPECTRAL)
    composed = fractime.half_derivative(fractime.half_derivative(field), "hilbert")

    assert np.allclose(composed.values, fractime.time_derivative(field).values)


def test_hilbert_transform(grid, rng):
    """
    Test `paradirac.fractime.hilbert_transform`.
    """
    values = np.array(ScalarField.random(grid, rng, SPECTRAL).values)
    values[..., 0] = 0.
    field = ScalarField(grid, values, SPECTRAL)

    twice = fractime.hilbert_transform(fractime.hilbert_transform(field))
    assert np.allclose(twice.values, -field.values)

    # the tau = 0 plane is annihilated
    const = ScalarField.pure_mode(grid, [2], 0)
    assert fractime.hilbert_transform(const).norm() < 1e-12


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_hilbert_transform_skew_adjoint(seed):
    """
    Test <Hf, g> = -<f, Hg> for `paradirac.fractime.hilbert_transform`.
    """
    rng = np.random.default_rng(seed)
    grid = Grid(1, 8, 8)
    f = ScalarField.random(grid, rng)
    g = ScalarField.random(grid, rng)

    lhs = fractime.hilbert_transform(f).inner(g)
    rhs = -f.inner(fractime.hilbert_transform(g))
    assert abs(lhs - rhs) <= 1e-12 * f.norm() * g.norm()


@pytest.mark.parametrize("variant", ["plain", "hilbert"])
def test_half_derivative_backends(variant):
    """
    Test that the kernel quadrature agrees with the padded spectral backend.
    """
    t, v = _gaussian()
    dt = t[1]
    kernel = fractime.half_derivative_kernel_apply(v, dt, variant)
    spectral = fractime.half_derivative_sequence(v, dt, variant)

    inner = slice(64, 448)
    assert np.max(np.abs(kernel[inner] - spectral[inner])) <= 1e-3 * np.max(np.abs(spectral[inner]))


def test_half_derivative_kernel_invalid():
    """
    Test `paradirac.fractime.half_derivative_kernel_apply` with invalid input.
    """
    with pytest.raises(error.UsageError):
        fractime.half_derivative_kernel_apply(np.ones(4), 0.1)

    with pytest.raises(error.UsageError):
        fractime.half_derivative_kernel_apply(np.ones(16), 0.)

    with pytest.raises(error.UsageError):
        fractime.half_derivative_kernel_apply(np.ones((4, 4)), 0.1)

    with pytest.raises(error.UsageError):
        fractime.half_derivative_kernel_apply(np.ones(16), 0.1, "riesz")


def test_half_derivative_kernel_constant():
    """
    Test that constants are annihilated by the kernel quadrature.
    """
    assert np.allclose(fractime.half_derivative_kernel_apply(np.full(32, 3.), 0.1), 0.)
    assert np.allclose(fractime.half_derivative_kernel_apply(np.full(32, 3.), 0.1, "hilbert"), 0.)


def test_spectral_line_apply():
    """
    Test `paradirac.fractime.spectral_line_apply`.
    """
    v = np.arange(16.)
    assert np.allclose(fractime.spectral_line_apply(v, 0.1, lambda tau: np.ones_like(tau), at_zero=1.), v)
    assert np.allclose(fractime.spectral_line_apply(v, 0.1, lambda tau: 2 * np.ones_like(tau), pad_factor=1, at_zero=2.), 2 * v)


def test_riesz_half_potential_spectral():
    """
    Test `paradirac.fractime.riesz_half_potential` spectral backend.
    """
    count, dt = 64, 0.25
    t = np.arange(count) * dt
    omega = 2 * np.pi * 3 / (count * dt)
    g = np.cos(omega * t)

    plain = fractime.riesz_half_potential(g, dt, backend="spectral")
    assert np.allclose(plain, omega ** -0.5 * g)

    hilbert = fractime.riesz_half_potential(g, dt, "hilbert", backend="spectral")
    assert np.allclose(hilbert, -omega ** -0.5 * np.sin(omega * t))

    with pytest.raises(error.UsageError):
        fractime.riesz_half_potential(g, dt, backend="wavelet")


def test_riesz_half_potential_kernel_parity():
    """
    Test `paradirac.fractime.riesz_half_potential` kernel backend.

    An even density has an even potential and an odd Hilbert potential.
    """
    count, dt = 129, 0.05
    t = (np.arange(count) - count // 2) * dt
    g = np.exp(-t ** 2)

    plain = fractime.riesz_half_potential(g, dt)
    assert np.allclose(plain, plain[::-1])

    hilbert = fractime.riesz_half_potential(g, dt, "hilbert")
    assert np.allclose(hilbert, -hilbert[::-1])
    assert abs(hilbert[count // 2]) < 1e-12


def test_riesz_half_split():
    """
    Test the bounds of `paradirac.fractime.riesz_half_split`.
    """
    count, dt = 256, 0.05
    t0 = (np.arange(count) - count // 2) * dt
    g = np.exp(-t0 ** 2) * np.cos(3 * t0)
    norm = np.sqrt(np.sum(np.abs(g) ** 2) * dt)

    t, v1, v2 = fractime.riesz_half_split(g, dt)

    assert np.allclose(t, t0)
    assert v1[count // 2] == 0
    assert np.all(np.abs(v1) <= 4 * np.abs(t) ** 0.25 * norm + 1e-12)
    assert np.sqrt(np.sum(np.abs(v2) ** 2) * dt) <= norm


def test_parabolic_riesz_potential(grid):
    """
    Test `paradirac.fractime.parabolic_riesz_potential`.
    """
    mode = ScalarField.pure_mode(grid, [2], 0)
    assert np.allclose(fractime.parabolic_riesz_potential(mode).values, mode.values / 2.)

    const = ScalarField(grid, np.ones(grid.shape))
    assert fractime.parabolic_riesz_potential(const).norm() == 0.


def test_fractional_derivative_sequence():
    """
    Test `paradirac.fractime.fractional_derivative_sequence`.
    """
    count, dt = 32, 0.5
    t = np.arange(count) * dt
    omega = 2 * np.pi * 2 / (count * dt)

    out = fractime.fractional_derivative_sequence(np.sin(omega * t), dt, 0.25)
    assert np.allclose(out, omega ** 0.25 * np.sin(omega * t))


def test_fractional_poincare_ratio(rng):
    """
    Test `paradirac.fractime.fractional_poincare_ratio`.
    """
    h = np.cumsum(rng.standard_normal(256)) * 0.1

    dilates = fractime.fractional_poincare_ratio(h, (120, 136), N=4, dt=0.1)
    assert 0 < dilates < np.inf

    translates = fractime.fractional_poincare_ratio(h, (120, 136), q=1.5, dt=0.1, form="translates")
    assert 0 < translates < np.inf

    # constants have no oscillation
    assert fractime.fractional_poincare_ratio(np.ones(256), (120, 136)) == 0.


def test_fractional_poincare_ratio_invalid(rng):
    """
    Test `paradirac.fractime.fractional_poincare_ratio` with invalid parameters.
    """
    h = rng.standard_normal(256)

    with pytest.raises(error.UsageError):
        fractime.fractional_poincare_ratio(h, (120, 136), alpha=0.7)

    with pytest.raises(error.UsageError):
        fractime.fractional_poincare_ratio(h, (120, 136), p=2., q=3.)

    with pytest.raises(error.UsageError):
        fractime.fractional_poincare_ratio(h, (120, 136), p=2., q=0.5)

    with pytest.raises(error.UsageError):
        fractime.fractional_poincare_ratio(h, (120, 136), N=1)

    with pytest.raises(error.UsageError):
        fractime.fractional_poincare_ratio(h, (120, 136), alpha=0.25, q=2., form="translates")

    with pytest.raises(error.UsageError):
        fractime.fractional_poincare_ratio(h, (120, 136), form="spiral")

    with pytest.raises(error.DomainError):
        fractime.fractional_poincare_ratio(h, (250, 260))

    with pytest.raises(error.DomainError):
        fractime.fractional_poincare_ratio(h, (0, 16), N=4)
