"""Friedrichs-type mollifiers, cutoff variants, and convolution against profiles.

Kernels are polynomial bumps on a compact interval, so unit mass and
vanishing moments are linear conditions solved exactly, derivatives of any
order are available in closed form, and convolution against polynomial
density pieces is exact under Gauss-Legendre quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from ._quadrature import adaptive_panel, fixed_panel, oscillatory_panel
from ._stats import linear_fit
from .errors import InsufficientDataError, InvalidParameterError
from .profiles import RoughProfile

Array = np.ndarray


@dataclass(frozen=True)
class Mollifier:
    """Smooth compactly supported kernel ``scale^-1 * P(t/scale)``.

    ``base_poly`` lives on [-base_radius, base_radius] and integrates to 1
    there; the physical kernel at scale ``s`` has support radius
    ``s * base_radius`` and unchanged unit mass.  ``moment_order`` is the
    number of vanishing moments beyond the zeroth that the kernel was built
    to satisfy.
    """

    base_poly: Polynomial
    base_radius: float = 1.0
    scale: float = 1.0
    moment_order: int = 0

    @property
    def support_radius(self) -> float:
        return self.scale * self.base_radius

    @property
    def degree(self) -> int:
        return len(self.base_poly.coef) - 1

    def __call__(self, t: Array | float) -> Array:
        return self.derivative(t, 0)

    def derivative(self, t: Array | float, k: int = 1) -> Array:
        """k-th kernel derivative, identically zero outside the support."""
        t = np.asarray(t, dtype=float)
        u = t / self.scale
        inside = np.abs(u) <= self.base_radius
        out = np.zeros(t.shape, dtype=float)
        if np.any(inside):
            poly = self.base_poly.deriv(k) if k else self.base_poly
            out[inside] = poly(u[inside]) / self.scale ** (k + 1)
        return out

    def moment(self, k: int) -> float:
        """Exact k-th moment ``int t^k kernel(t) dt``."""
        poly = self.base_poly
        if k:
            poly = poly * Polynomial([0.0, 1.0]) ** k
        anti = poly.integ()
        value = anti(self.base_radius) - anti(-self.base_radius)
        return float(value) * self.scale ** k

    def integral(self) -> float:
        return self.moment(0)


def _even_moment_table(power: int, max_even: int) -> dict[int, float]:
    """Exact values of ``int_{-1}^{1} u^k (1-u^2)^power du`` for even k."""
    base = Polynomial([1.0, 0.0, -1.0]) ** power
    table = {}
    for k in range(0, max_even + 1, 2):
        poly = base * Polynomial([0.0, 1.0]) ** k if k else base
        anti = poly.integ()
        table[k] = float(anti(1.0) - anti(-1.0))
    return table


def friedrichs_mollifier(power: int = 8) -> Mollifier:
    """Unit-mass bump ``c (1 - t^2)^power`` on [-1, 1]."""
    poly = Polynomial([1.0, 0.0, -1.0]) ** power
    anti = poly.integ()
    mass = float(anti(1.0) - anti(-1.0))
    return Mollifier(poly / mass, base_radius=1.0, scale=1.0, moment_order=0)


def vanishing_moment_mollifier(q: int, power: int = 8) -> Mollifier:
    """Bump kernel whose moments 1..q vanish exactly.

    Built as an even polynomial weight times ``(1-t^2)^power``; odd moments
    vanish by symmetry and the even ones are killed by a small exact linear
    solve, so no tabulation or truncation error enters the kernel.
    """
    if q < 0:
        raise InvalidParameterError("moment order must be >= 0")
    n_even = q // 2 + 1  # unknown even weight coefficients a_0, a_2, ...
    table = _even_moment_table(power, 4 * (n_even - 1) + 2)
    system = np.array([[table[2 * r + 2 * i] for i in range(n_even)]
                       for r in range(n_even)])
    rhs = np.zeros(n_even)
    rhs[0] = 1.0
    weights = np.linalg.solve(system, rhs)
    coefs = np.zeros(2 * n_even - 1)
    coefs[::2] = weights
    poly = Polynomial(coefs) * Polynomial([1.0, 0.0, -1.0]) ** power
    return Mollifier(poly, base_radius=1.0, scale=1.0, moment_order=q)


def scale_mollifier(m: Mollifier, epsilon: float) -> Mollifier:
    """Rescale: kernel_eps(t) = eps^-1 kernel(t/eps); unit mass preserved."""
    if not epsilon > 0:
        raise InvalidParameterError(f"scale must be positive, got {epsilon}")
    return replace(m, scale=m.scale * epsilon)


# -- cutoff mollifier ---------------------------------------------------------


def plateau_cutoff(inner: float = 2.0, outer: float = 4.0) -> Callable[[Array], Array]:
    """Quintic-smoothstep plateau: 1 on |x|<=inner, 0 on |x|>=outer."""
    if not outer > inner > 0:
        raise InvalidParameterError("need outer > inner > 0")

    def chi(x: Array | float) -> Array:
        u = (np.abs(np.asarray(x, dtype=float)) - inner) / (outer - inner)
        u = np.clip(u, 0.0, 1.0)
        return 1.0 - u ** 3 * (10.0 - 15.0 * u + 6.0 * u * u)

    return chi


@dataclass(frozen=True)
class GevreyCutoffMollifier:
    """Scaled kernel multiplied by a plateau cutoff shrinking like 1/|log w|.

    Evaluates to ``w^-1 base(x/w) * chi(x |log w|)``.  For compactly
    supported base kernels and small scales the cutoff is identically one on
    the kernel support, so unit mass and vanishing moments are inherited.
    """

    base: Mollifier
    scale: float
    cutoff: Callable[[Array], Array] = None  # set in __post_init__
    cutoff_outer: float = 4.0

    def __post_init__(self):
        if not 0 < self.scale:
            raise InvalidParameterError("cutoff mollifier scale must be positive")
        if self.cutoff is None:
            object.__setattr__(self, "cutoff", plateau_cutoff(2.0, self.cutoff_outer))

    @property
    def support_radius(self) -> float:
        kernel_radius = self.scale * self.base.support_radius
        log_factor = abs(math.log(self.scale))
        if log_factor == 0.0:
            return kernel_radius
        return min(kernel_radius, self.cutoff_outer / log_factor)

    def with_scale(self, omega: float) -> "GevreyCutoffMollifier":
        return GevreyCutoffMollifier(self.base, omega, self.cutoff,
                                     self.cutoff_outer)

    def __call__(self, x: Array | float) -> Array:
        x = np.asarray(x, dtype=float)
        log_factor = abs(math.log(self.scale))
        scaled = scale_mollifier(self.base, self.scale)
        return scaled(x) * self.cutoff(x * log_factor)

    def fourier_transform(self, xi: Array, tol: float = 1e-12) -> Array:
        r = self.support_radius
        return oscillatory_panel(self.__call__, -r, r, np.asarray(xi, float),
                                 tol=tol)


# -- convolution ---------------------------------------------------------------


class Convolution:
    """Smooth function ``(profile * kernel)``, optionally differentiated.

    Atoms convolve analytically into kernel derivatives; density pieces are
    integrated per evaluation point, exactly for declared-polynomial pieces
    and adaptively otherwise (absolute tolerance ``tol``).
    """

    def __init__(self, profile: RoughProfile, kernel: Mollifier,
                 derivative: int = 0, tol: float = 1e-10):
        self.profile = profile
        self.kernel = kernel
        self.derivative_order = derivative
        self.tol = tol
        r = kernel.support_radius
        lo = min([p.lo for p in profile.pieces]
                 + [a.location for a in profile.atoms]
                 + [profile.support[0]])
        hi = max([p.hi for p in profile.pieces]
                 + [a.location for a in profile.atoms]
                 + [profile.support[1]])
        self.support = (lo - r, hi + r)

    def derivative(self, k: int = 1) -> "Convolution":
        return Convolution(self.profile, self.kernel,
                           self.derivative_order + k, self.tol)

    def __call__(self, t: Array | float) -> Array:
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.zeros(t.shape, dtype=complex)
        k = self.derivative_order
        kernel = self.kernel
        r = kernel.support_radius
        for atom in self.profile.atoms:
            out += atom.weight * kernel.derivative(t - atom.location,
                                                   atom.order + k)
        # integrate in the kernel variable y = t - s: node positions are then
        # built at the kernel scale, immune to cancellation when the scale is
        # many orders below |t|
        t_flat = t.ravel()
        for piece in self.profile.pieces:
            lo_y = np.maximum(-r, t - piece.hi)
            hi_y = np.minimum(r, t - piece.lo)

            if piece.degree is not None:
                def exact_integrand(y: Array, _fn=piece.fn) -> Array:
                    return np.asarray(_fn(t[..., None] - y)) \
                        * kernel.derivative(y, k)

                n_exact = (piece.degree + kernel.degree) // 2 + 2
                out += fixed_panel(exact_integrand, lo_y, hi_y, n_exact)
            else:
                def integrand(y: Array, idx: Array, _fn=piece.fn) -> Array:
                    return np.asarray(_fn(t_flat[idx][:, None] - y)) \
                        * kernel.derivative(y, k)

                contrib = adaptive_panel(integrand, lo_y, hi_y, tol=self.tol,
                                         context="profile convolution")
                out += contrib.reshape(t.shape)
        if np.max(np.abs(out.imag), initial=0.0) == 0.0:
            out = out.real
        return out[0] if scalar else out


def convolve_profile(p: RoughProfile, m: Mollifier,
                     derivative: int = 0, tol: float = 1e-10) -> Convolution:
    """Smooth callable ``t -> (p * m)(t)`` (or its derivative)."""
    if not math.isfinite(m.support_radius) or m.support_radius <= 0:
        raise InvalidParameterError("kernel must have positive finite support")
    return Convolution(p, m, derivative=derivative, tol=tol)


# -- approximation-rate diagnostics --------------------------------------------


@dataclass(frozen=True)
class ApproximationRateFit:
    """Fitted decay order of the cutoff-mollifier approximation error."""

    q_hat: float
    r_squared: float
    omegas: tuple[float, ...]
    errors: tuple[float, ...]
    exact: bool
    nu: float
    s: float

    def rows(self):
        return [(w, e) for w, e in zip(self.omegas, self.errors)]


def fourier_approximation_rate(p: RoughProfile, g: GevreyCutoffMollifier,
                               s: float, xi_grid: Array,
                               omegas: Sequence[float] | None = None,
                               nu: float = 2.0) -> ApproximationRateFit:
    """Fit the order of ``sup_xi |FT(p*rho_w) - FT(p)| exp(-nu <xi>^(1/s))``.

    Sweeps the cutoff-mollifier scale, measures the weighted transform error
    on the given frequency grid and regresses log-error on log-scale.  A base
    kernel with q vanishing moments yields a fitted order of at least q.
    """
    if g.base.moment_order < 1:
        raise InvalidParameterError(
            "approximation-rate fit needs a kernel with vanishing moments")
    if omegas is None:
        omegas = tuple(float(w) for w in np.geomspace(0.01, 0.1, 8))
    if len(omegas) < 3:
        raise InsufficientDataError(
            "approximation-rate fit needs at least 3 scale samples")
    xi = np.asarray(xi_grid, dtype=float)
    if xi.size == 0:
        raise InvalidParameterError("frequency grid is empty")
    weight = np.exp(-nu * (1.0 + xi ** 2) ** (0.5 / s))
    p_hat = p.fourier_transform(xi)
    errors = []
    for w in omegas:
        rho_hat = g.with_scale(w).fourier_transform(xi)
        errors.append(float(np.max(np.abs(p_hat * (rho_hat - 1.0)) * weight)))
    errors_arr = np.asarray(errors)
    if np.all(errors_arr < 1e-300):
        return ApproximationRateFit(math.inf, 1.0, tuple(omegas),
                                    tuple(errors), True, nu, s)
    slope, _, r2 = linear_fit(np.log(np.asarray(omegas)), np.log(errors_arr))
    return ApproximationRateFit(float(slope), float(r2), tuple(omegas),
                                tuple(errors), False, nu, s)
