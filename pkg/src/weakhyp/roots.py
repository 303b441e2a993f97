"""Characteristic root families and their separated mollified regularisations.

A root family holds, per root index j and unit direction d, a rough time
profile r_j(., d) with lambda_j(t, xi) = r_j(t, xi/|xi|) |xi| (degree-one
homogeneity).  Regularisation convolves each profile in time at scale
omega(eps) and adds the separating shift j*omega(eps)*<xi>, which makes the
regularised family strictly hyperbolic with gap at least omega(eps)*<xi>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from ._stats import linear_fit
from .errors import InsufficientDataError, InvalidParameterError
from .mollifiers import Convolution, Mollifier, convolve_profile, scale_mollifier
from .profiles import Piece, RoughProfile, constant_profile, extend_profile

#: coefficient-type profiles are continued past [0, T] by this margin so that
#: mollification near the interval ends sees no artificial jump
EDGE_PAD = 2.0

Array = np.ndarray

def bracket(xi: Array | float) -> Array:
    """The weight <xi> = (1 + |xi|^2)^(1/2) for scalar frequencies."""
    xi = np.asarray(xi, dtype=float)
    return np.sqrt(1.0 + xi * xi)


def bracket_norm(xi_vec: Sequence[float]) -> float:
    """<xi> for a frequency vector."""
    v = np.asarray(xi_vec, dtype=float).ravel()
    return float(math.sqrt(1.0 + float(v @ v)))


# -- scale functions -----------------------------------------------------------


@dataclass(frozen=True)
class OmegaScale:
    """Mollification scale eps -> omega(eps) in (0, 1].

    ``power_floor = (c, r)`` declares the lower bound omega(eps) >= c*eps^r
    the scale promises; it is spot-checked when sweeps are run.
    """

    name: str
    fn: Callable[[float], float]
    power_floor: tuple[float, float] = (1.0, 1.0)

    def __call__(self, epsilon: float) -> float:
        if not 0.0 < epsilon <= 1.0:
            raise InvalidParameterError(
                f"epsilon must lie in (0, 1], got {epsilon}")
        w = float(self.fn(epsilon))
        if not 0.0 < w <= 1.0:
            raise InvalidParameterError(
                f"scale {self.name} left (0, 1] at eps={epsilon}: {w}")
        c, r = self.power_floor
        if w < 0.999999 * c * epsilon ** r:
            raise InvalidParameterError(
                f"scale {self.name} broke its declared floor {c}*eps^{r}")
        return w


def linear_scale(coefficient: float = 1.0) -> OmegaScale:
    if not 0.0 < coefficient <= 1.0:
        raise InvalidParameterError("linear scale coefficient must be in (0, 1]")
    return OmegaScale(f"linear({coefficient:g})",
                      lambda e: coefficient * e,
                      power_floor=(coefficient, 1.0))


def logarithmic_scale(n_exponent: int, order: int) -> OmegaScale:
    """omega(eps) = (ln(e + 1/eps))^(-1/(N + m^2 - m)); decays slower than
    any power of eps, which is what keeps the exponential energy factor
    polynomially bounded."""
    if order < 1:
        raise InvalidParameterError("order must be >= 1")
    expo = 1.0 / (n_exponent + order * order - order)
    return OmegaScale(f"logarithmic(N={n_exponent}, m={order})",
                      lambda e: (math.log(math.e + 1.0 / e)) ** (-expo),
                      power_floor=((math.log(math.e + 1e9)) ** (-expo), 0.0))


def constant_scale(omega0: float) -> OmegaScale:
    if not 0.0 < omega0 <= 1.0:
        raise InvalidParameterError("constant scale must be in (0, 1]")
    return OmegaScale(f"constant({omega0:g})", lambda e: omega0,
                      power_floor=(omega0, 0.0))


# -- root families ---------------------------------------------------------------


def _direction_key(direction: Sequence[float]) -> tuple[float, ...]:
    d = np.asarray(direction, dtype=float).ravel()
    norm = float(np.linalg.norm(d))
    if norm == 0.0:
        raise InvalidParameterError("direction must be nonzero")
    return tuple(round(float(x), 12) for x in d / norm)


@dataclass
class RootFamily:
    """m real bounded roots, homogeneous of degree one in the frequency."""

    order: int
    dimension: int
    profile_fn: Callable[[int, tuple[float, ...]], RoughProfile]
    bound: float
    ordered: bool
    horizon: float = 1.0
    _cache: dict = field(default_factory=dict, repr=False)

    def profile(self, j: int, direction: Sequence[float]) -> RoughProfile:
        """Time profile of root j (1-based) along a unit direction."""
        if not 1 <= j <= self.order:
            raise InvalidParameterError(f"root index {j} outside 1..{self.order}")
        key = (j, _direction_key(direction))
        if key not in self._cache:
            self._cache[key] = self.profile_fn(j, key[1])
        return self._cache[key]

    def evaluate(self, j: int, t: Array | float, xi: Sequence[float] | float
                 ) -> Array:
        """lambda_j(t, xi) for a single frequency point."""
        v = np.atleast_1d(np.asarray(xi, dtype=float))
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            return np.zeros(np.shape(t))
        vals = self.profile(j, v / norm).density(t)
        return np.real(vals) * norm

    def check_realness(self, t_samples: Array, directions) -> bool:
        for d in directions:
            for j in range(1, self.order + 1):
                vals = self.profile(j, d).density(t_samples)
                if np.max(np.abs(np.imag(vals)), initial=0.0) > 0.0:
                    return False
        return True

    def check_ordered(self, t_samples: Array, directions) -> float:
        """Smallest gap r_{j+1} - r_j over the samples (negative = unordered)."""
        worst = math.inf
        for d in directions:
            stack = np.array([np.real(self.profile(j, d).density(t_samples))
                              for j in range(1, self.order + 1)])
            if self.order > 1:
                worst = min(worst, float(np.min(np.diff(stack, axis=0))))
        return worst if worst is not math.inf else 0.0

    def check_bound(self, t_samples: Array, directions) -> float:
        top = 0.0
        for d in directions:
            for j in range(1, self.order + 1):
                vals = np.abs(self.profile(j, d).density(t_samples))
                top = max(top, float(np.max(vals, initial=0.0)))
        return top


def _transformed_profile(profile: RoughProfile,
                         func: Callable[[Array], Array]) -> RoughProfile:
    """Apply a pointwise map to the density; degree-0 pieces stay degree 0."""
    pieces = tuple(
        Piece(p.lo, p.hi,
              (lambda f: (lambda t: func(np.asarray(f(t)))))(p.fn),
              0 if p.degree == 0 else None)
        for p in profile.pieces)
    if profile.atoms:
        raise InvalidParameterError("root profiles cannot carry atoms")
    return RoughProfile(pieces, (), profile.support)


def constant_roots(values: Sequence[float], dimension: int = 1,
                   horizon: float = 1.0) -> RootFamily:
    vals = [float(v) for v in values]
    ordered = all(a <= b for a, b in zip(vals, vals[1:]))
    profiles = [constant_profile(v, (-EDGE_PAD, horizon + EDGE_PAD))
                for v in vals]
    return RootFamily(order=len(vals), dimension=dimension,
                      profile_fn=lambda j, d: profiles[j - 1],
                      bound=max((abs(v) for v in vals), default=0.0),
                      ordered=ordered, horizon=horizon)


def roots_from_time_profiles(profiles: Sequence[RoughProfile],
                             dimension: int = 1, bound: float | None = None,
                             ordered: bool = True,
                             horizon: float = 1.0) -> RootFamily:
    """Direction-independent family (even symbols, e.g. wave-type)."""
    profs = [extend_profile(p, EDGE_PAD) for p in profiles]
    fam = RootFamily(order=len(profs), dimension=dimension,
                     profile_fn=lambda j, d: profs[j - 1],
                     bound=0.0, ordered=ordered, horizon=horizon)
    t = np.linspace(0.0, horizon, 257)
    fam.bound = bound if bound is not None else fam.check_bound(
        t, [tuple([1.0] + [0.0] * (dimension - 1))])
    return fam


def roots_from_linear_forms(coeff_profiles: Sequence[Sequence[RoughProfile]],
                            horizon: float = 1.0,
                            ordered: bool = True) -> RootFamily:
    """r_j(t, d) = sum_k c_jk(t) d_k; polynomial symbols for every order.

    Ordering of distinct linear forms can only hold on the closed positive
    orthant (componentwise-increasing coefficients), which is where the
    recovery plans sample.
    """
    padded = [[extend_profile(c, EDGE_PAD) for c in row]
              for row in coeff_profiles]
    m = len(padded)
    n = len(padded[0])

    def profile_fn(j: int, d: tuple[float, ...]) -> RoughProfile:
        out = None
        for k, c in enumerate(padded[j - 1]):
            term = c.scaled(d[k])
            out = term if out is None else out + term
        return out

    fam = RootFamily(order=m, dimension=n, profile_fn=profile_fn,
                     bound=0.0, ordered=ordered, horizon=horizon)
    t = np.linspace(0.0, horizon, 129)
    fam.bound = max(
        float(np.max(np.abs(padded[j][k].density(t)), initial=0.0))
        for j in range(m) for k in range(n)) * math.sqrt(n)
    return fam


def wave_speed_roots(speed: RoughProfile, horizon: float = 1.0) -> RootFamily:
    """Second-order pair -/+ sqrt(a(t)) |xi| from a positive speed profile."""
    t = np.linspace(0.0, horizon, 513)
    vals = np.real(speed.density(t))
    if np.min(vals) <= 0.0:
        raise InvalidParameterError("wave speed profile must be positive")
    plus = _transformed_profile(speed, np.sqrt)
    minus = plus.scaled(-1.0)
    return roots_from_time_profiles([minus, plus], dimension=1,
                                    bound=float(np.sqrt(vals.max())),
                                    ordered=True, horizon=horizon)


def transport_roots(speed: float, horizon: float = 1.0) -> RootFamily:
    """Single root a*xi (odd symbol), any sign of the speed."""
    prof = constant_profile(abs(speed), (-EDGE_PAD, horizon + EDGE_PAD))

    def profile_fn(j: int, d: tuple[float, ...]) -> RoughProfile:
        return prof.scaled(math.copysign(1.0, speed) * d[0])

    return RootFamily(order=1, dimension=1, profile_fn=profile_fn,
                      bound=abs(speed), ordered=True, horizon=horizon)


# -- regularisation ---------------------------------------------------------------


@dataclass
class RegularisedRoots:
    """Separated mollified root family lambda_{j,eps}(t, xi).

    ``value`` includes the separating shift j*omega(eps)*<xi>; ``pure_value``
    is the plain time convolution, which keeps the exact degree-one
    homogeneity and is what coefficient recovery consumes.
    """

    base: RootFamily
    mollifier: Mollifier
    omega: OmegaScale
    _conv_cache: dict = field(default_factory=dict, repr=False)

    @property
    def order(self) -> int:
        return self.base.order

    def omega_of(self, epsilon: float) -> float:
        return self.omega(epsilon)

    def convolved(self, j: int, direction: Sequence[float],
                  epsilon: float) -> Convolution:
        w = self.omega_of(epsilon)
        key = (j, _direction_key(direction), w)
        if key not in self._conv_cache:
            kernel = scale_mollifier(self.mollifier, w)
            self._conv_cache[key] = convolve_profile(
                self.base.profile(j, direction), kernel)
        return self._conv_cache[key]

    def pure_value(self, j: int, t: Array | float, xi, epsilon: float) -> Array:
        v = np.atleast_1d(np.asarray(xi, dtype=float))
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            return np.zeros(np.shape(t))
        return np.real(self.convolved(j, v / norm, epsilon)(t)) * norm

    def separation(self, j: int, xi, epsilon: float) -> float:
        v = np.atleast_1d(np.asarray(xi, dtype=float))
        return j * self.omega_of(epsilon) * bracket_norm(v)

    @staticmethod
    def frequency_weights(xi) -> dict[str, float]:
        """Both candidate frequency weights at xi, for diagnostics.

        The separating shift uses <xi>; the plain modulus is reported next
        to it so the discrepancy between the two normalisations stays
        visible in run records.
        """
        v = np.atleast_1d(np.asarray(xi, dtype=float))
        return {"modulus": float(np.linalg.norm(v)),
                "bracket": bracket_norm(v)}

    def value(self, j: int, t: Array | float, xi, epsilon: float) -> Array:
        return self.pure_value(j, t, xi, epsilon) + self.separation(j, xi, epsilon)

    def values(self, t: float, xi, epsilon: float) -> Array:
        return np.array([float(self.value(j, t, xi, epsilon))
                         for j in range(1, self.order + 1)])

    def pure_values(self, t: float, xi, epsilon: float) -> Array:
        return np.array([float(self.pure_value(j, t, xi, epsilon))
                         for j in range(1, self.order + 1)])

    def direction_table(self, t: Array, epsilon: float,
                        directions: Sequence[Sequence[float]]
                        ) -> Mapping[tuple[float, ...], Array]:
        """Convolved profile values, shape (m, len(t)), per unit direction."""
        out = {}
        for d in directions:
            key = _direction_key(d)
            out[key] = np.array([
                np.real(self.convolved(j, key, epsilon)(t))
                for j in range(1, self.order + 1)])
        return out


def regularise_roots(family: RootFamily, mollifier: Mollifier,
                     omega: OmegaScale) -> RegularisedRoots:
    """Attach a mollifier and scale to an ordered family.

    The separation certificate needs the base ordering, so an unordered
    family is rejected up front.
    """
    if not family.ordered:
        raise InvalidParameterError(
            "root family must be declared ordered; separation cannot be "
            "certified otherwise")
    return RegularisedRoots(base=family, mollifier=mollifier, omega=omega)


# -- moderateness certification ----------------------------------------------------

_STENCILS = {
    1: ((-1, 0, 1), (-0.5, 0.0, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 0, 1, 2), (-0.5, 1.0, 0.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}


@dataclass(frozen=True)
class ModeratenessSample:
    epsilons: tuple[float, ...]
    xi: tuple[float, ...] | float = 8.0
    t_count: int = 161


@dataclass(frozen=True)
class ExponentFit:
    j: int
    k: int
    n_fitted: float
    r_squared: float
    sup_norms: tuple[float, ...]
    trivially_zero: bool


def certify_moderateness(reg: RegularisedRoots, k_max: int,
                         sample: ModeratenessSample) -> list[ExponentFit]:
    """Fit N_k in sup_t |d_t^k lambda_{j,eps}| <= c eps^{-N_k} |xi|.

    Derivatives are central finite differences with step omega(eps)/50, fine
    enough to resolve the mollification scale.  With omega(eps) = eps and a
    jump-discontinuous profile the fitted exponents track k.
    """
    if k_max > 4 or k_max < 1:
        raise InvalidParameterError(
            "finite-difference depth limit: k_max must be in 1..4")
    eps_list = tuple(sample.epsilons)
    if len(eps_list) < 3:
        raise InsufficientDataError("moderateness fit needs >= 3 epsilon values")
    xi = sample.xi
    xi_norm = float(np.linalg.norm(np.atleast_1d(np.asarray(xi, float))))
    t_grid = np.linspace(0.0, reg.base.horizon, sample.t_count)
    fits: list[ExponentFit] = []
    for j in range(1, reg.order + 1):
        for k in range(1, k_max + 1):
            offsets, weights = _STENCILS[k]
            sups = []
            floors = []
            for eps in eps_list:
                h = reg.omega_of(eps) / 50.0
                acc = np.zeros(t_grid.shape)
                scale = 0.0
                for off, wgt in zip(offsets, weights):
                    vals = np.asarray(
                        reg.value(j, t_grid + off * h, xi, eps), dtype=float)
                    scale = max(scale, float(np.max(np.abs(vals))))
                    acc = acc + wgt * vals
                sups.append(float(np.max(np.abs(acc / h ** k))))
                # rounding noise of the stencil itself; anything below it is
                # numerically indistinguishable from a zero derivative
                floors.append(64.0 * np.finfo(float).eps * scale
                              * sum(abs(w) for w in weights) / h ** k)
            if all(s_ <= f_ for s_, f_ in zip(sups, floors)):
                fits.append(ExponentFit(j, k, 0.0, 1.0, tuple(sups), True))
                continue
            slope, _, r2 = linear_fit(np.log(1.0 / np.asarray(eps_list)),
                                      np.log(np.maximum(sups, 1e-300)))
            fits.append(ExponentFit(j, k, float(slope), float(r2),
                                    tuple(sups), False))
    return fits
