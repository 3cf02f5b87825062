"""Shared numerics: Fourier tools on S^1, finite differences in s,
quintic resampling, Chebyshev collocation, quadrature weights.

Grid conventions used throughout the package:

* the circle coordinate t lives on [0,1) with n_t uniform samples and is
  always the last array axis; Fourier frequencies are the integers
  ``fftfreq(n_t) * n_t`` and Parseval holds exactly for the quadrature
  weight 1/n_t,
* the axial coordinate s is sampled on explicit grids (uniform for the
  scale spaces, Chebyshev for the Cauchy-Riemann module) and is the
  second-to-last axis.
"""

import numpy as np
from scipy.interpolate import make_interp_spline

TWO_PI = 2.0 * np.pi


# -- circle direction (spectral) --------------------------------------------

def t_grid(n_t):
    return np.arange(n_t) / n_t


def t_modes(n_t):
    """Integer Fourier frequencies in FFT order."""
    return np.fft.fftfreq(n_t, d=1.0 / n_t)


def t_derivative(values, order=1):
    """Spectral d/dt of samples on the unit circle, along the last axis."""
    if order == 0:
        return values.copy()
    n_t = values.shape[-1]
    mult = (TWO_PI * 1j * t_modes(n_t)) ** order
    return np.fft.ifft(np.fft.fft(values, axis=-1) * mult, axis=-1)


def t_rotate(values, theta):
    """Exact rotation u(t) -> u(t - theta) via phase multiplication."""
    if theta == 0.0:
        return values.copy()
    n_t = values.shape[-1]
    phase = np.exp(-TWO_PI * 1j * t_modes(n_t) * theta)
    return np.fft.ifft(np.fft.fft(values, axis=-1) * phase, axis=-1)


def t_mean(values):
    """Mean over the circle = zeroth Fourier coefficient."""
    return values.mean(axis=-1)


# -- axial direction: 4th-order finite differences ---------------------------

_INTERIOR = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_EDGE0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_EDGE1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0


def fd4(values, h, axis=-2):
    """First derivative along ``axis`` on a uniform grid of spacing h.

    4th-order centered stencils inside, one-sided 4th-order stencils at the
    two points next to each boundary. Stencils are local, so errors stay
    proportional to the local scale of the data (important under the
    exponential norm weights).
    """
    v = np.moveaxis(values, axis, 0)
    n = v.shape[0]
    if n < 5:
        raise ValueError("fd4 needs at least 5 points")
    out = np.empty_like(v)
    out[2:-2] = (_INTERIOR[0] * v[:-4] + _INTERIOR[1] * v[1:-3]
                 + _INTERIOR[3] * v[3:-1] + _INTERIOR[4] * v[4:])
    out[0] = np.tensordot(_EDGE0, v[:5], axes=(0, 0))
    out[1] = np.tensordot(_EDGE1, v[:5], axes=(0, 0))
    out[-1] = -np.tensordot(_EDGE0, v[-5:][::-1], axes=(0, 0))
    out[-2] = -np.tensordot(_EDGE1, v[-5:][::-1], axes=(0, 0))
    out /= h
    return np.moveaxis(out, 0, axis)


def fd4_nth(values, h, order, axis=-2):
    """Repeated fd4; order 0 returns a copy."""
    out = values.copy()
    for _ in range(order):
        out = fd4(out, h, axis=axis)
    return out


# -- quintic resampling ------------------------------------------------------

def quintic_spline(s, values, axis=-2):
    """Quintic interpolating spline along ``axis`` (complex data allowed).

    Extrapolates with the boundary polynomial pieces; callers are expected
    to mask evaluations that fall far outside [s[0], s[-1]].
    """
    k = 5 if len(s) > 5 else 3
    if np.iscomplexobj(values):
        re = make_interp_spline(s, values.real, k=k, axis=axis)
        im = make_interp_spline(s, values.imag, k=k, axis=axis)
        return lambda x: re(x) + 1j * im(x)
    return make_interp_spline(s, values, k=k, axis=axis)


def resample_s(values, s_old, s_new, axis=-2):
    """Evaluate the quintic interpolant of ``values`` at the new s grid."""
    return quintic_spline(s_old, values, axis=axis)(s_new)


def masked_eval(spline, x, valid, axis=-2):
    """Evaluate ``spline`` where ``valid`` holds and return 0 elsewhere.

    Used when a formula multiplies a field by an exactly-zero cutoff
    outside the field's domain: the product is well defined even though the
    field itself is not, so out-of-domain points are never touched.
    ``axis`` locates the x-axis in the spline's output.
    """
    x = np.asarray(x, dtype=float)
    valid = np.asarray(valid, dtype=bool)
    anchor = x[np.argmax(valid)] if valid.any() else 0.0
    vals = spline(np.where(valid, x, anchor))
    shape = [1] * vals.ndim
    shape[axis if axis >= 0 else vals.ndim + axis] = x.size
    return np.where(valid.reshape(shape), vals, 0.0)


# -- quadrature --------------------------------------------------------------

def trapezoid_weights(s):
    """Trapezoid rule weights for an arbitrary increasing grid."""
    s = np.asarray(s, dtype=float)
    w = np.zeros_like(s)
    d = np.diff(s)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


# -- Chebyshev collocation ---------------------------------------------------

def cheb_points(n, a, b):
    """n Chebyshev-Gauss-Lobatto points on [a, b], ascending."""
    if n < 2:
        raise ValueError("need at least 2 points")
    x = np.cos(np.pi * np.arange(n - 1, -1, -1) / (n - 1))  # ascending in [-1,1]
    return a + (b - a) * (x + 1.0) / 2.0


def cheb_diff(n, a, b):
    """Differentiation matrix matching cheb_points(n, a, b)."""
    N = n - 1
    x = np.cos(np.pi * np.arange(n) / N)  # descending
    c = np.ones(n)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(n)
    X = np.tile(x, (n, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(n))
    D -= np.diag(D.sum(axis=1))
    # flip to ascending order and rescale from [-1,1] to [a,b]
    D = D[::-1, ::-1]
    return D * (2.0 / (b - a))


def cheb_quad_weights(n, a, b):
    """Clenshaw-Curtis quadrature weights for cheb_points(n, a, b)."""
    N = n - 1
    theta = np.pi * np.arange(n) / N
    w = np.zeros(n)
    interior = theta[1:-1]
    v = np.ones(N - 1)
    if N % 2 == 0:
        w[0] = w[N] = 1.0 / (N * N - 1.0)
        for k in range(1, N // 2):
            v -= 2.0 * np.cos(2.0 * k * interior) / (4.0 * k * k - 1.0)
        v -= np.cos(N * interior) / (N * N - 1.0)
    else:
        w[0] = w[N] = 1.0 / (N * N)
        for k in range(1, (N - 1) // 2 + 1):
            v -= 2.0 * np.cos(2.0 * k * interior) / (4.0 * k * k - 1.0)
    w[1:-1] = 2.0 * v / N
    w = w[::-1]
    return w * (b - a) / 2.0
