# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

"""Dense parabolic operators L = d_t - div_x A(x, t) grad_x and their square roots."""

import collections

import numpy as np
import scipy.linalg

from paradirac import error, log
from paradirac.spectral import ScalarField


logger = log.get_logger(__name__)

ACCRETIVITY_TOL = 1e-10

KatoRatios = collections.namedtuple("KatoRatios", ["minimum", "maximum", "trial_min", "trial_max", "residual"])


class KatoOperator(object):
    """
    Dense matrix of L acting on physical grid values, flattened in C order.

    `kappa` is the ellipticity of the tangential block A_par_par, the constant
    in Re <Lu, u> >= kappa ||grad_x u||^2.
    """

    def __init__(self, grid, coefficients, matrix):
        self.grid = grid
        self.coefficients = coefficients
        self.matrix = matrix

        herm = (coefficients + np.swapaxes(coefficients.conj(), -1, -2)) / 2
        self.kappa = float(np.min(np.linalg.eigvalsh(herm)))

    def __repr__(self):
        return "KatoOperator(%r, kappa=%.3g)" % (self.grid, self.kappa)

    @property
    def size(self):
        return self.matrix.shape[0]

    def apply(self, u):
        return (self.matrix @ u.as_physical().values.ravel()).reshape(self.grid.shape)

    def form(self, u):
        """<Lu, u>."""
        return complex(np.vdot(u.as_physical().values, self.apply(u)) * self.grid.dV)

    def gradient_norm2(self, u):
        coeffs = u.as_spectral().values
        return float(np.sum(self.grid.xi_norm2 * np.abs(coeffs) ** 2) * self.grid.dV)

    def half_norm2(self, u):
        coeffs = u.as_spectral().values
        return float(np.sum(np.abs(self.grid.tau) * np.abs(coeffs) ** 2) * self.grid.dV)

    def accretivity_margin(self, trials=100, rng=None):
        """min over random u of (Re <Lu, u> - kappa ||grad u||^2) / ||grad u||^2."""
        rng = rng or np.random.default_rng(0)
        margin = np.inf
        for i in range(trials):
            u = ScalarField.random(self.grid, rng)
            g2 = self.gradient_norm2(u)
            if g2 > 0:
                margin = min(margin, (self.form(u).real - self.kappa * g2) / g2)

        return float(margin)

    @property
    def eigenvalues(self):
        return np.linalg.eigvals(self.matrix)

    def check_accretive(self):
        values = self.eigenvalues
        worst = float(np.min(values.real))
        if worst < -ACCRETIVITY_TOL * max(1., float(np.max(np.abs(values)))):
            raise error.AccretivityError("L has spectrum in the left half-plane", details="min Re %.3e" % worst)

        return worst

    def sqrt(self):
        """Principal square root (Schur method)."""
        self.check_accretive()
        root = scipy.linalg.sqrtm(self.matrix)
        return np.asarray(root, dtype=complex)


def _apply_parabolic(grid, coefficients, u):
    """L u for a batch of physical arrays of shape (..., *grid.shape)."""
    axes = tuple(range(-grid.n - 1, 0))
    xi, tau = grid.lattice
    coeffs = np.fft.fftn(u, axes=axes, norm="ortho")

    grad = np.stack([np.fft.ifftn(1j * xi[j] * coeffs, axes=axes, norm="ortho") for j in range(grid.n)], axis=-1)
    flux = np.einsum("...ij,...j->...i", coefficients, grad)

    div = sum(1j * xi[j] * np.fft.fftn(flux[..., j], axes=axes, norm="ortho") for j in range(grid.n))
    return np.fft.ifftn(1j * tau * coeffs - div, axes=axes, norm="ortho")


def assemble_parabolic_L(A, grid, kato_max=4096):
    """
    Dense L for the tangential block of `A` (or a bare (n, n) coefficient
    array), by applying the spectral operator to the canonical basis.
    """
    if grid.size > kato_max:
        raise error.UsageError("Grid too large for dense operators", details="%d > %d" % (grid.size, kato_max))

    coefficients = np.asarray(getattr(A, "par_par", A), dtype=complex)
    if coefficients.shape[-1] != grid.n:
        raise error.UsageError("Coefficient dimension does not match grid", details=str(coefficients.shape))

    if coefficients.ndim == 2:
        coefficients = np.broadcast_to(coefficients, grid.shape + coefficients.shape)
    elif coefficients.shape[:-2] != grid.shape:
        raise error.UsageError("Coefficient samples do not match grid", details=str(coefficients.shape))

    basis = np.eye(grid.size, dtype=complex).reshape((grid.size,) + grid.shape)
    columns = _apply_parabolic(grid, coefficients, basis).reshape(grid.size, grid.size)
    matrix = np.ascontiguousarray(columns.T)

    logger.debug("assembled dense L of size %d", grid.size)
    return KatoOperator(grid, coefficients, matrix)


def _inverse_fourier_matrix(grid):
    basis = np.eye(grid.size, dtype=complex).reshape((grid.size,) + grid.shape)
    columns = np.fft.ifftn(basis, axes=tuple(range(1, grid.n + 2)), norm="ortho").reshape(grid.size, grid.size)
    return columns.T


def kato_sqrt_ratio(Lop, trials=100, rng=None):
    """
    Extremes of ||sqrt(L) u|| / (||grad u||^2 + ||D^(1/2) u||^2)^(1/2) over
    mean-free u, from the singular values on the nonzero modes and from
    random trials, plus the relative residual of sqrt(L)^2 - L.
    """
    grid = Lop.grid
    root = Lop.sqrt()
    residual = float(np.linalg.norm(root @ root - Lop.matrix) / np.linalg.norm(Lop.matrix))

    weight = np.sqrt(grid.xi_norm2 + np.abs(grid.tau)).ravel()
    nonzero = weight > 0
    transfer = root @ _inverse_fourier_matrix(grid)[:, nonzero] / weight[nonzero]
    singular = scipy.linalg.svdvals(transfer)

    rng = rng or np.random.default_rng(0)
    ratios = []
    for i in range(trials):
        coeffs = np.array(ScalarField.random(grid, rng).as_spectral().values)
        coeffs[grid.zero_index()] = 0.
        u = np.fft.ifftn(coeffs, norm="ortho").ravel()
        ratios.append(np.linalg.norm(root @ u) / np.linalg.norm(weight * coeffs.ravel()))

    result = KatoRatios(float(singular.min()), float(singular.max()),
                        float(min(ratios)) if ratios else np.nan, float(max(ratios)) if ratios else np.nan, residual)
    logger.debug("kato ratios [%.4f, %.4f], residual %.2e", result.minimum, result.maximum, residual)
    return result
