# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

"""
Half-order calculus in time.

Spectral operators act on `ScalarField` objects (periodic in t). Kernel
operators act on 1-D sample windows representing functions on the line,
extended outside the window by their boundary values.
"""

import numpy as np

from paradirac import error, log
from paradirac.spectral import ParabolicSymbol, apply_symbol


logger = log.get_logger(__name__)

# zeta(-1/2) and zeta(1/2)
ZETA_M_HALF = -0.20788622497735457
ZETA_HALF = -1.4603545088095868

_KERNEL_CONSTANT = 1. / (2 * np.sqrt(2 * np.pi))
_RIESZ_CONSTANT = 1. / np.sqrt(2 * np.pi)

_VARIANTS = ("plain", "hilbert")


def _check_variant(variant):
    if variant not in _VARIANTS:
        raise error.UsageError("Unknown variant", details=variant)


def _half_symbol(variant):
    _check_variant(variant)
    if variant == "plain":
        return ParabolicSymbol(lambda xi, tau: np.sqrt(np.abs(tau)), name="D^1/2")

    return ParabolicSymbol(lambda xi, tau: 1j * np.sign(tau) * np.sqrt(np.abs(tau)), name="HD^1/2")


def half_derivative(field, variant="plain"):
    """D^(1/2) (symbol |tau|^(1/2)) or H D^(1/2) (symbol i sgn(tau) |tau|^(1/2))."""
    return apply_symbol(_half_symbol(variant), field)


def hilbert_transform(field):
    """Multiplier i sgn(tau); the tau = 0 plane is annihilated."""
    return apply_symbol(ParabolicSymbol(lambda xi, tau: 1j * np.sign(tau), name="H"), field)


def time_derivative(field):
    return apply_symbol(ParabolicSymbol(lambda xi, tau: 1j * tau, name="d/dt"), field)


def _samples(samples, dt, minimum):
    v = np.asarray(samples, dtype=complex)
    if v.ndim != 1:
        raise error.UsageError("Expected a 1-D sample sequence")

    if len(v) < minimum:
        raise error.UsageError("Too few samples", details="%d < %d" % (len(v), minimum))

    if not dt > 0:
        raise error.UsageError("Sample spacing must be positive", details="dt=%s" % dt)

    return v


def _line_frequencies(count, dt):
    return 2 * np.pi * np.fft.fftfreq(count, d=dt)


def spectral_line_apply(samples, dt, multiplier, pad_factor=16, at_zero=0.):
    """
    Apply `multiplier(tau)` to a window of samples viewed on the line.

    The window is zero padded `pad_factor` times so that periodic images are
    far away; the result is restricted back to the window.
    """
    v = _samples(samples, dt, 1)
    total = len(v) * max(1, int(pad_factor))
    tau = _line_frequencies(total, dt)

    with np.errstate(divide="ignore", invalid="ignore"):
        m = multiplier(tau)

    m = np.where(tau == 0, at_zero, m)
    return np.fft.ifft(np.fft.fft(v, n=total) * m)[:len(v)]


def half_derivative_sequence(samples, dt, variant="plain", pad_factor=16):
    """Spectral backend of `half_derivative_kernel_apply`."""
    _check_variant(variant)
    if variant == "plain":
        return spectral_line_apply(samples, dt, lambda tau: np.sqrt(np.abs(tau)), pad_factor)

    return spectral_line_apply(samples, dt, lambda tau: 1j * np.sign(tau) * np.sqrt(np.abs(tau)), pad_factor)


def half_derivative_kernel_apply(samples, dt, variant="plain"):
    """
    Principal value quadrature of

        D^(1/2) v(t)   = c int (v(t) - v(s)) |t-s|^(-3/2) ds
        H D^(1/2) v(t) = c int (v(t) - v(s)) sgn(t-s) |t-s|^(-3/2) ds

    with c = 1 / (2 sqrt(2 pi)). Off-diagonal cells use the midpoint rule, the
    diagonal cell gets the leading zeta-function correction and the parts
    outside the window are integrated exactly against the boundary values.
    """
    _check_variant(variant)
    v = _samples(samples, dt, 8)
    count = len(v)

    t = np.arange(count) * dt
    u = t[:, None] - t[None, :]
    with np.errstate(divide="ignore"):
        kernel = np.abs(u) ** -1.5

    np.fill_diagonal(kernel, 0.)
    if variant == "hilbert":
        kernel *= np.sign(u)

    kernel *= dt
    out = v * kernel.sum(axis=1) - kernel @ v

    dv = np.gradient(v, dt)
    if variant == "plain":
        out += np.gradient(dv, dt) * ZETA_M_HALF * dt ** 1.5
    else:
        out -= 2 * dv * ZETA_HALF * dt ** 0.5

    left = t + dt / 2.
    right = t[-1] - t + dt / 2.
    tail_left = (v - v[0]) * 2 / np.sqrt(left)
    tail_right = (v - v[-1]) * 2 / np.sqrt(right)
    out += tail_left - tail_right if variant == "hilbert" else tail_left + tail_right

    return _KERNEL_CONSTANT * out


def riesz_half_potential(g, dt, variant="plain", backend="kernel", origin=None):
    """
    Modified Riesz potential I_(1/2) g (or I_(1/2) H g with variant="hilbert").

    Kernel backend: (2 pi)^(-1/2) |t-s|^(-1/2), minus its value at the origin for
    |s| >= 1, with the time origin at sample index `origin` (default: middle of
    the window). The hilbert variant uses -sgn(t-s) |t-s|^(-1/2). Spectral
    backend: periodic multiplier |tau|^(-1/2) (times i sgn(tau)) with the zero
    mode dropped. Both are defined up to an additive constant.
    """
    _check_variant(variant)
    g = _samples(g, dt, 2)
    count = len(g)

    if backend == "spectral":
        tau = _line_frequencies(count, dt)
        with np.errstate(divide="ignore", invalid="ignore"):
            m = np.abs(tau) ** -0.5
            if variant == "hilbert":
                m = 1j * np.sign(tau) * m

        m[0] = 0.
        return np.fft.ifft(np.fft.fft(g) * m)

    if backend != "kernel":
        raise error.UsageError("Unknown backend", details=backend)

    origin = count // 2 if origin is None else origin
    t = (np.arange(count) - origin) * dt
    u = t[:, None] - t[None, :]

    with np.errstate(divide="ignore"):
        kernel = np.abs(u) ** -0.5
        far = np.where(np.abs(t) >= 1, np.abs(t) ** -0.5, 0.)

    np.fill_diagonal(kernel, 0.)
    if variant == "hilbert":
        kernel *= -np.sign(u)
        far = -np.sign(t) * far

    out = dt * (kernel @ g) - dt * np.sum(far * g)
    if variant == "plain":
        out += -2 * ZETA_HALF * dt ** 0.5 * g
    else:
        out -= 2 * ZETA_M_HALF * np.gradient(g, dt) * dt ** 1.5

    return _RIESZ_CONSTANT * out


def riesz_half_split(g, dt, pad_factor=16, origin=None):
    """
    Split I_(1/2) g = v1 + v2 (up to a constant) into the low-frequency part

        v1(t) = (2 pi)^(-1) int_{|tau|<1} (e^(i t tau) - 1) |tau|^(-1/2) g^(tau) dtau

    and v2 = F^-1(1_{|tau|>=1} |tau|^(-1/2) g^). Returns (t, v1, v2) on the window,
    with the time origin at sample `origin` (default: middle).
    """
    g = _samples(g, dt, 2)
    count = len(g)
    origin = count // 2 if origin is None else origin
    total = count * max(1, int(pad_factor))

    t = (np.arange(count) - origin) * dt
    tau = _line_frequencies(total, dt)
    dtau = 2 * np.pi / (total * dt)

    # continuous Fourier transform with the time origin at `origin`
    ghat = np.fft.fft(g, n=total) * dt * np.exp(1j * tau * origin * dt)

    low = (np.abs(tau) < 1) & (tau != 0)
    weight = np.zeros(total)
    weight[low] = np.abs(tau[low]) ** -0.5
    phase = np.exp(1j * np.outer(t, tau[low])) - 1.
    v1 = phase @ (weight[low] * ghat[low]) * dtau / (2 * np.pi)

    high = np.abs(tau) >= 1
    m = np.zeros(total)
    m[high] = np.abs(tau[high]) ** -0.5
    v2 = np.fft.ifft(np.fft.fft(g, n=total) * m)[:count]

    return t, v1, v2


def parabolic_riesz_potential(g):
    """I_par: multiplier (|xi| + |tau|^(1/2))^(-1), zero mode set to 0."""
    symbol = ParabolicSymbol(lambda xi, tau: 1. / (np.sqrt(np.sum(xi ** 2, axis=0)) + np.sqrt(np.abs(tau))), name="I_par")
    return apply_symbol(symbol, g)


def fractional_derivative_sequence(h, dt, alpha):
    """Periodic spectral D^alpha of a sample window."""
    tau = _line_frequencies(len(h), dt)
    return np.fft.ifft(np.fft.fft(h) * np.abs(tau) ** alpha)


def _interval_mean(values, start, stop):
    return np.mean(values[start:stop])


def fractional_poincare_ratio(h, J, alpha=0.5, p=2., q=2., N=4, dt=1., form="dilates"):
    """
    LHS / RHS of the fractional Poincare inequality on the index interval J.

    LHS = (avg_J |h - avg_J h|^p)^(1/p).
    With form="dilates":
        RHS = l(J)^alpha (sum_{l >= 1} N^((alpha-1) l) avg_{N^l J} |D^alpha h|^q)^(1/q)
    over the concentric dilates that fit in the window. With form="translates"
    (alpha = 1/2 only):
        RHS = l(J)^(1/2) (sum_k (1+|k|^(3/2))^(-1) avg_{J_k} |D^(1/2) h|^q)^(1/q)
    over the translates J_k = J + k l(J) inside the window.
    A vanishing LHS gives 0.
    """
    h = _samples(h, dt, 2)
    start, stop = int(J[0]), int(J[1])

    if not 0 < alpha <= 0.5:
        raise error.UsageError("Fractional order must lie in (0, 1/2]", details="alpha=%g" % alpha)

    if not ((1 - alpha) * p < q <= p):
        raise error.UsageError("Exponents must satisfy (1-alpha) p < q <= p", details="p=%g q=%g" % (p, q))

    if int(N) != N or N < 2:
        raise error.UsageError("Dilation factor must be an integer >= 2", details="N=%s" % N)

    if not 0 <= start < stop <= len(h):
        raise error.DomainError("Interval outside the sample window", details="J=[%d, %d)" % (start, stop))

    length = stop - start
    lhs = _interval_mean(np.abs(h[start:stop] - np.mean(h[start:stop])) ** p, 0, length) ** (1. / p)
    dh = np.abs(fractional_derivative_sequence(h, dt, alpha)) ** q

    terms = []
    if form == "dilates":
        center = (start + stop) / 2.
        level = 1
        while True:
            half = N ** level * length / 2.
            lo, hi = int(round(center - half)), int(round(center + half))
            if lo < 0 or hi > len(h):
                break

            terms.append(N ** ((alpha - 1) * level) * _interval_mean(dh, lo, hi))
            level += 1

        if not terms:
            raise error.DomainError("Interval too close to the window edge for its first dilate", details="J=[%d, %d)" % (start, stop))

    elif form == "translates":
        if alpha != 0.5:
            raise error.UsageError("Translate form is only defined for alpha = 1/2")

        for k in range(-(start // length), (len(h) - stop) // length + 1):
            lo = start + k * length
            terms.append(_interval_mean(dh, lo, lo + length) / (1 + abs(k) ** 1.5))

    else:
        raise error.UsageError("Unknown inequality form", details=form)

    rhs = (length * dt) ** alpha * np.sum(terms) ** (1. / q)
    if lhs == 0:
        return 0.

    if rhs == 0:
        return float("inf")

    return float(lhs / rhs)
