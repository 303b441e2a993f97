"""Rough one-dimensional profiles: piecewise-smooth densities plus atoms.

A :class:`RoughProfile` models the admissible coefficient and datum classes:
a bounded piecewise-smooth density together with a finite combination of
derivatives of point masses.  The same type serves time profiles (equation
coefficients, lower-order terms, temporal forcing factors) and space profiles
(initial data, spatial forcing factors).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._quadrature import adaptive_panel, oscillatory_panel
from .errors import InvalidParameterError

Array = np.ndarray


@dataclass(frozen=True)
class PointMass:
    """``weight * (d/dt)^order delta(t - location)`` in the distributional sense."""

    location: float
    order: int = 0
    weight: complex = 1.0

    def __post_init__(self):
        if self.order < 0:
            raise InvalidParameterError("point mass derivative order must be >= 0")


@dataclass(frozen=True)
class Piece:
    """A smooth density piece on [lo, hi).

    ``degree`` declares the polynomial degree when the evaluator is exactly
    polynomial; quadrature against polynomial kernels is then exact with a
    fixed node count.  ``degree=None`` marks a general smooth (or endpoint
    singular, e.g. Hoelder) piece handled by adaptive quadrature.
    """

    lo: float
    hi: float
    fn: Callable[[Array], Array]
    degree: int | None = None

    def __post_init__(self):
        if not self.hi > self.lo:
            raise InvalidParameterError("piece must have positive length")


def _const_fn(value: complex) -> Callable[[Array], Array]:
    def fn(t: Array) -> Array:
        return np.full(np.shape(t), value)
    return fn


@dataclass(frozen=True)
class RoughProfile:
    """Piecewise-smooth density plus a finite list of point-mass atoms."""

    pieces: tuple[Piece, ...] = ()
    atoms: tuple[PointMass, ...] = ()
    support: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        a, b = self.support
        if not b >= a:
            raise InvalidParameterError("support interval must be ordered")
        tol = 1e-12 * max(1.0, abs(a), abs(b))
        for p in self.pieces:
            if p.lo < a - tol or p.hi > b + tol:
                raise InvalidParameterError(
                    f"piece [{p.lo}, {p.hi}] outside support [{a}, {b}]")
        for atom in self.atoms:
            if atom.location < a - tol or atom.location > b + tol:
                raise InvalidParameterError(
                    f"atom at {atom.location} outside support [{a}, {b}]")

    # -- evaluation -------------------------------------------------------

    def density(self, t: Array | float) -> Array:
        """Evaluate the density part (atoms carry no pointwise values).

        Pieces are half-open [lo, hi) except that the right-most endpoint is
        closed, so the density is defined on all of its support.
        """
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        top = max((p.hi for p in self.pieces), default=None)
        for p in self.pieces:
            mask = (t >= p.lo) & (t < p.hi)
            if p.hi == top:
                mask |= t == p.hi
            if np.any(mask):
                out[mask] += np.asarray(p.fn(t[mask]), dtype=complex)
        if np.max(np.abs(out.imag), initial=0.0) == 0.0:
            return out.real
        return out

    __call__ = density

    def density_bound(self, samples_per_piece: int = 257) -> float:
        """Sampled sup-norm of the density (boundedness check)."""
        best = 0.0
        for p in self.pieces:
            # stay off the endpoints so endpoint-singular evaluators stay finite
            t = np.linspace(p.lo, p.hi, samples_per_piece + 2)[1:-1]
            vals = np.abs(np.asarray(p.fn(t), dtype=complex))
            if not np.all(np.isfinite(vals)):
                raise InvalidParameterError(
                    f"density piece [{p.lo}, {p.hi}] is unbounded at samples")
            best = max(best, float(vals.max(initial=0.0)))
        return best

    @property
    def is_polynomial(self) -> bool:
        return all(p.degree is not None for p in self.pieces)

    @property
    def max_piece_degree(self) -> int:
        return max((p.degree for p in self.pieces if p.degree is not None),
                   default=0)

    # -- linear structure ---------------------------------------------------

    def scaled(self, a: complex) -> "RoughProfile":
        pieces = tuple(
            Piece(p.lo, p.hi, (lambda f: (lambda t: a * np.asarray(f(t))))(p.fn),
                  p.degree)
            for p in self.pieces)
        atoms = tuple(PointMass(at.location, at.order, a * at.weight)
                      for at in self.atoms)
        return RoughProfile(pieces, atoms, self.support)

    def __mul__(self, a: complex) -> "RoughProfile":
        return self.scaled(a)

    __rmul__ = __mul__

    def __add__(self, other: "RoughProfile") -> "RoughProfile":
        support = (min(self.support[0], other.support[0]),
                   max(self.support[1], other.support[1]))
        return RoughProfile(self.pieces + other.pieces,
                            self.atoms + other.atoms, support)

    def __neg__(self) -> "RoughProfile":
        return self.scaled(-1.0)

    def __sub__(self, other: "RoughProfile") -> "RoughProfile":
        return self + other.scaled(-1.0)

    # -- transforms ---------------------------------------------------------

    def fourier_transform(self, xi: Array, tol: float = 1e-12) -> Array:
        """Continuous Fourier transform ``int p(t) exp(-i t xi) dt``.

        Atoms contribute ``weight * (i xi)^order * exp(-i xi location)``
        exactly; density pieces are integrated by oscillation-aware
        Gauss-Legendre refinement.
        """
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape, dtype=complex)
        for p in self.pieces:
            out += oscillatory_panel(p.fn, p.lo, p.hi, xi, tol=tol)
        for at in self.atoms:
            out += at.weight * (1j * xi) ** at.order * np.exp(-1j * xi * at.location)
        return out

    def integral(self, tol: float = 1e-12) -> complex:
        total = 0.0 + 0.0j
        for p in self.pieces:
            total += complex(adaptive_panel(
                lambda s, idx, _fn=p.fn: np.asarray(_fn(s)),
                np.array(p.lo), np.array(p.hi), tol=tol))
        for at in self.atoms:
            if at.order == 0:
                total += at.weight
        return total


# -- constructors -----------------------------------------------------------

def constant_profile(value: complex, support: tuple[float, float]) -> RoughProfile:
    lo, hi = support
    return RoughProfile((Piece(lo, hi, _const_fn(value), degree=0),),
                        (), support)


def heaviside_profile(jump: float, low: complex, high: complex,
                      support: tuple[float, float]) -> RoughProfile:
    """`low` before the jump time, `high` from it on."""
    lo, hi = support
    if not lo < jump < hi:
        raise InvalidParameterError("jump time must lie inside the support")
    return RoughProfile((Piece(lo, jump, _const_fn(low), degree=0),
                         Piece(jump, hi, _const_fn(high), degree=0)),
                        (), support)


def piecewise_constant_profile(breakpoints: Sequence[float],
                               values: Sequence[complex],
                               support: tuple[float, float]) -> RoughProfile:
    """Density equal to values[k] on [b_k, b_{k+1}); breakpoints include ends."""
    bp = [float(b) for b in breakpoints]
    if len(values) != len(bp) - 1:
        raise InvalidParameterError("need one value per interval")
    if any(b1 <= b0 for b0, b1 in zip(bp, bp[1:])):
        raise InvalidParameterError("breakpoints must increase strictly")
    pieces = tuple(Piece(b0, b1, _const_fn(v), degree=0)
                   for b0, b1, v in zip(bp, bp[1:], values))
    return RoughProfile(pieces, (), support)


def hoelder_profile(alpha: float, center: float, base: float, amplitude: float,
                    support: tuple[float, float]) -> RoughProfile:
    """``base + amplitude * |t - center|^alpha``: C^alpha at the center."""
    if not 0.0 < alpha <= 1.0:
        raise InvalidParameterError("Hoelder exponent must be in (0, 1]")
    lo, hi = support

    def left(t: Array) -> Array:
        return base + amplitude * np.abs(center - t) ** alpha

    def right(t: Array) -> Array:
        return base + amplitude * np.abs(t - center) ** alpha

    pieces = []
    if lo < center < hi:
        pieces = [Piece(lo, center, left, degree=None),
                  Piece(center, hi, right, degree=None)]
    else:
        pieces = [Piece(lo, hi, right, degree=None)]
    return RoughProfile(tuple(pieces), (), support)


def polynomial_piece_profile(coeffs: Sequence[float], lo: float, hi: float,
                             support: tuple[float, float] | None = None
                             ) -> RoughProfile:
    """Single polynomial piece, coefficients in ascending powers of t."""
    poly = np.polynomial.Polynomial(list(coeffs))

    def fn(t: Array) -> Array:
        return poly(t)

    sup = support if support is not None else (lo, hi)
    return RoughProfile((Piece(lo, hi, fn, degree=max(len(coeffs) - 1, 0)),),
                        (), sup)


def point_mass_profile(location: float, order: int = 0, weight: complex = 1.0,
                       support: tuple[float, float] | None = None
                       ) -> RoughProfile:
    sup = support if support is not None else (location, location)
    return RoughProfile((), (PointMass(location, order, weight),), sup)


def bump_profile(center: float, radius: float, amplitude: float = 1.0,
                 power: int = 8) -> RoughProfile:
    """Compactly supported C^{power-1} bump ``amplitude*(1-((x-c)/r)^2)^power``."""
    if radius <= 0:
        raise InvalidParameterError("bump radius must be positive")

    def fn(x: Array) -> Array:
        u = (x - center) / radius
        return amplitude * (1.0 - u * u) ** power

    return RoughProfile(
        (Piece(center - radius, center + radius, fn, degree=2 * power),),
        (), (center - radius, center + radius))


def smooth_bump_profile(center: float, radius: float,
                        amplitude: float = 1.0) -> RoughProfile:
    """C-infinity bump ``amplitude * exp(1 - 1/(1 - u^2))``; its transform
    decays faster than any power, unlike the polynomial bump."""
    if radius <= 0:
        raise InvalidParameterError("bump radius must be positive")

    def fn(x: Array) -> Array:
        u = (x - center) / radius
        out = np.zeros(np.shape(u))
        inside = np.abs(u) < 1.0
        out[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
        return out

    return RoughProfile(
        (Piece(center - radius, center + radius, fn, degree=None),),
        (), (center - radius, center + radius))


def box_profile(center: float, halfwidth: float,
                amplitude: float = 1.0) -> RoughProfile:
    if halfwidth <= 0:
        raise InvalidParameterError("box halfwidth must be positive")
    return RoughProfile(
        (Piece(center - halfwidth, center + halfwidth, _const_fn(amplitude),
               degree=0),),
        (), (center - halfwidth, center + halfwidth))


def zero_profile(support: tuple[float, float] = (0.0, 0.0)) -> RoughProfile:
    return RoughProfile((), (), support)


def extend_profile(profile: RoughProfile, pad: float) -> RoughProfile:
    """Continue the density constantly past both support ends.

    Mollifying a coefficient that is meant to hold on a working interval
    must not see artificial jumps at the interval ends, so coefficient-type
    profiles are extended by their one-sided edge values before convolution.
    Atoms are left untouched.
    """
    if pad <= 0:
        raise InvalidParameterError("extension pad must be positive")
    if not profile.pieces:
        return RoughProfile(profile.pieces, profile.atoms,
                            (profile.support[0] - pad, profile.support[1] + pad))
    lo = min(p.lo for p in profile.pieces)
    hi = max(p.hi for p in profile.pieces)
    first = min(profile.pieces, key=lambda p: p.lo)
    last = max(profile.pieces, key=lambda p: p.hi)
    left_val = complex(np.asarray(first.fn(np.array([lo]))).ravel()[0])
    right_val = complex(np.asarray(last.fn(np.array([hi]))).ravel()[0])
    pieces = (Piece(lo - pad, lo, _const_fn(left_val), degree=0),) \
        + profile.pieces \
        + (Piece(hi, hi + pad, _const_fn(right_val), degree=0),)
    support = (min(profile.support[0], lo) - pad,
               max(profile.support[1], hi) + pad)
    return RoughProfile(pieces, profile.atoms, support)
