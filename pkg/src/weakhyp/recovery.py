"""Signed elementary symmetric functions and principal-coefficient recovery.

The characteristic polynomial of a regularised root system has coefficients
``sigma_h = (-1)^h e_h(roots)``; evaluated along finitely many frequency
directions these pin down every homogeneous coefficient through a staircase
of small linear solves, one invertible block per monomial support set.  The
round trip closes the loop: recovered coefficients are turned back into a
polynomial whose companion eigenvalues must reproduce the regularised roots.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import InvalidParameterError, PlanError
from .mollifiers import Mollifier
from .roots import (OmegaScale, RegularisedRoots, RootFamily, bracket_norm,
                    constant_scale, regularise_roots, roots_from_linear_forms)
from .profiles import piecewise_constant_profile

Array = np.ndarray


# -- elementary symmetric machinery ---------------------------------------------


def characteristic_polynomial(roots: Sequence[float] | Array) -> Array:
    """Descending coefficients of prod_j (tau - roots_j); leading entry 1.

    The returned array is ``[1, sigma_1, ..., sigma_m]`` so that the product
    equals ``tau^m + sum_h sigma_h tau^(m-h)``.  Vectorised over leading axes
    of ``roots``.
    """
    roots = np.asarray(roots)
    if roots.ndim == 0:
        roots = roots[None]
    m = roots.shape[-1]
    coeffs = np.zeros(roots.shape[:-1] + (m + 1,), dtype=roots.dtype)
    coeffs[..., 0] = 1
    for i in range(m):
        prev = coeffs[..., :i + 1].copy()
        coeffs[..., 1:i + 2] -= roots[..., i:i + 1] * prev
    return coeffs


def sigma(roots: Sequence[float] | Array, h: int) -> float | Array:
    """sigma_h = (-1)^h e_h(roots) via the stable product recursion."""
    roots = np.asarray(roots)
    m = roots.shape[-1] if roots.ndim else 1
    if not 0 <= h <= m:
        raise InvalidParameterError(f"level {h} outside 0..{m}")
    coeffs = characteristic_polynomial(roots)[..., h]
    return float(coeffs) if coeffs.ndim == 0 else coeffs


def sigma_brute_force(roots: Sequence[float], h: int) -> float:
    """Direct subset enumeration; test oracle for :func:`sigma`."""
    roots = list(roots)
    if not 0 <= h <= len(roots):
        raise InvalidParameterError(f"level {h} outside 0..{len(roots)}")
    if h == 0:
        return 1.0
    total = 0.0
    for combo in itertools.combinations(roots, h):
        total += math.prod(combo)
    return (-1.0) ** h * total


# -- direction plans --------------------------------------------------------------


def multi_indices(degree: int, dimension: int) -> list[tuple[int, ...]]:
    """All nu in N^dimension with |nu| = degree, lexicographically sorted."""
    if dimension == 1:
        return [(degree,)]
    out = []
    for head in range(degree + 1):
        for tail in multi_indices(degree - head, dimension - 1):
            out.append((head,) + tail)
    return sorted(out)


def _monomial(xi: Sequence[float], nu: tuple[int, ...]) -> float:
    return math.prod(x ** p for x, p in zip(xi, nu) if p)


@dataclass(frozen=True)
class SupportBlock:
    """One invertible solve: all indices sharing a monomial support set."""

    support: tuple[int, ...]
    members: tuple[tuple[int, ...], ...]
    directions: tuple[tuple[float, ...], ...]
    matrix: np.ndarray
    condition: float


@dataclass(frozen=True)
class DirectionPlan:
    degree: int
    dimension: int
    blocks: tuple[SupportBlock, ...]
    warnings: tuple[str, ...]

    @property
    def directions(self) -> list[tuple[float, ...]]:
        return [d for b in self.blocks for d in b.directions]


def _candidate_rays(support: tuple[int, ...], dimension: int
                    ) -> list[tuple[float, ...]]:
    """Vectors with entries in {1, 2} on the support, proportional ones pruned."""
    rays: list[tuple[float, ...]] = []
    seen: set[tuple[float, ...]] = set()
    for combo in itertools.product((1.0, 2.0), repeat=len(support)):
        vec = [0.0] * dimension
        for c, v in zip(support, combo):
            vec[c] = v
        norm = math.sqrt(sum(v * v for v in vec))
        key = tuple(round(v / norm, 12) for v in vec)
        if key in seen:
            continue
        seen.add(key)
        rays.append(tuple(vec))
    return sorted(rays)


@lru_cache(maxsize=None)
def build_direction_plan(degree: int, dimension: int,
                         cond_warn: float = 1e8,
                         cond_singular: float = 1e14) -> DirectionPlan:
    """Directions and solve matrices for one homogeneity degree.

    Support sets are processed smallest first (single coordinates use the
    unit directions), so each block's right-hand side only involves already
    recovered coefficients.  For each block the candidate pool of {0,1,2}
    direction vectors is searched exhaustively for the best-conditioned
    square submatrix; the pools are tiny at desk scale.  Numerically
    singular blocks raise; merely ill-conditioned ones are recorded as
    warnings.
    """
    if degree < 1:
        raise InvalidParameterError("degree must be >= 1")
    if dimension < 1:
        raise InvalidParameterError("dimension must be >= 1")
    all_nu = multi_indices(degree, dimension)
    supports = sorted({tuple(i for i, p in enumerate(nu) if p) for nu in all_nu},
                      key=lambda s: (len(s), s))
    blocks = []
    warnings: list[str] = []
    for support in supports:
        members = tuple(nu for nu in all_nu
                        if tuple(i for i, p in enumerate(nu) if p) == support)
        rays = _candidate_rays(support, dimension)
        k = len(members)
        if len(rays) < k:
            raise PlanError(
                f"support {support} of degree {degree}: only {len(rays)} "
                f"independent rays for {k} unknowns")
        best: tuple[float, tuple[int, ...]] | None = None
        for combo in itertools.combinations(range(len(rays)), k):
            mat = np.array([[_monomial(rays[r], nu) for nu in members]
                            for r in combo])
            cond = float(np.linalg.cond(mat))
            if best is None or cond < best[0]:
                best = (cond, combo)
        cond, combo = best
        if not math.isfinite(cond) or cond > cond_singular:
            raise PlanError(
                f"support {support} of degree {degree}: no candidate "
                f"direction set is invertible (best condition {cond:.3e})")
        if cond > cond_warn:
            warnings.append(
                f"support {support} of degree {degree}: condition {cond:.3e}")
        directions = tuple(rays[r] for r in combo)
        matrix = np.array([[_monomial(d, nu) for nu in members]
                           for d in directions])
        blocks.append(SupportBlock(support, members, directions, matrix, cond))
    return DirectionPlan(degree, dimension, tuple(blocks), tuple(warnings))


# -- coefficient recovery -----------------------------------------------------------


@dataclass
class HomogeneousCoefficientSet:
    """Recovered coefficients of one homogeneity degree, as callables of t.

    Evaluation is exact at every requested time: the block matrices are
    time independent, so recovery at a batch of times is one factorised
    solve against stacked right-hand sides, with no interpolation step.
    """

    degree: int
    dimension: int
    epsilon: float
    roots: RegularisedRoots
    plan: DirectionPlan
    _cache: dict = field(default_factory=dict, repr=False)

    def _sigma_at(self, t: Array, xi: tuple[float, ...]) -> Array:
        vals = np.array([self.roots.pure_value(j, t, xi, self.epsilon)
                         for j in range(1, self.roots.order + 1)])
        return characteristic_polynomial(np.moveaxis(vals, 0, -1))[..., self.degree]

    def evaluate(self, t: Array | float) -> Mapping[tuple[int, ...], Array]:
        """Values of every coefficient of this degree at the given times."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        key = t_arr.tobytes()
        if key in self._cache:
            return self._cache[key]
        values: dict[tuple[int, ...], Array] = {}
        for block in self.plan.blocks:
            rhs = np.empty((len(block.directions), t_arr.size))
            for r, xi in enumerate(block.directions):
                acc = -np.asarray(self._sigma_at(t_arr, xi), dtype=float)
                for nu, vals in values.items():
                    if all(nu[i] == 0 or i in block.support
                           for i in range(self.dimension)):
                        acc -= vals * _monomial(xi, nu)
                rhs[r] = acc
            sol = np.linalg.solve(block.matrix, rhs)
            for i, nu in enumerate(block.members):
                values[nu] = sol[i]
        self._cache[key] = values
        return values

    @property
    def coefficients(self) -> Mapping[tuple[int, ...], Callable[[Array], Array]]:
        return {nu: self.coefficient(nu)
                for block in self.plan.blocks for nu in block.members}

    def coefficient(self, nu: tuple[int, ...]) -> Callable[[Array], Array]:
        def call(t: Array | float) -> Array:
            out = self.evaluate(t)[tuple(nu)]
            return float(out[0]) if np.ndim(t) == 0 else out
        return call

    def sigma_hat(self, t: Array | float, xi: Sequence[float]) -> Array:
        """-sum_nu a_nu(t) xi^nu, the polynomial reconstruction of sigma."""
        values = self.evaluate(t)
        total = None
        for nu, vals in values.items():
            term = vals * _monomial(xi, nu)
            total = term if total is None else total + term
        out = -total
        return float(out[0]) if np.ndim(t) == 0 else out

    def reconstruction_residual(self, t: Array,
                                xis: Sequence[Sequence[float]] | None = None
                                ) -> float:
        """Max relative defect of sigma_hat against sigma at directions."""
        xis = list(xis) if xis is not None else self.plan.directions
        worst = 0.0
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        for xi in xis:
            target = np.asarray(self._sigma_at(t_arr, tuple(xi)), dtype=float)
            got = np.asarray(self.sigma_hat(t_arr, xi), dtype=float)
            scale = max(float(np.max(np.abs(target))), 1.0)
            worst = max(worst, float(np.max(np.abs(got - target))) / scale)
        return worst


def recover_coefficients(reg: RegularisedRoots, degree: int, dimension: int,
                         epsilon: float = 0.5) -> HomogeneousCoefficientSet:
    """Solve the direction-plan systems for one homogeneity degree.

    Works on the pure convolution part of the regularised roots: that part
    is exactly homogeneous of degree one, so its symmetric functions are the
    polynomial data the plan inverts.  The separating shift is not a
    polynomial symbol and is reattached exactly where systems are assembled.
    """
    if degree > reg.order:
        raise InvalidParameterError(
            f"degree {degree} exceeds the family order {reg.order}")
    plan = build_direction_plan(degree, dimension)
    return HomogeneousCoefficientSet(degree=degree, dimension=dimension,
                                     epsilon=epsilon, roots=reg, plan=plan)


# -- round trip ------------------------------------------------------------------


@dataclass(frozen=True)
class RoundTripProbe:
    t: float
    xi: tuple[float, ...]
    rel_error: float


@dataclass(frozen=True)
class RoundTripReport:
    max_rel_error: float
    probes: tuple[RoundTripProbe, ...]
    failures: tuple[str, ...]
    plan_warnings: tuple[str, ...]


def round_trip_check(family: RootFamily, mollifier: Mollifier,
                     omega: OmegaScale | float, trials: int,
                     epsilon: float = 0.5,
                     rng: np.random.Generator | None = None) -> RoundTripReport:
    """Regularise, recover, rebuild the polynomial, root-solve, compare.

    Each probe draws a random (t, xi) in the positive frequency orthant,
    rebuilds ``tau^m + sum sigma_hat_h tau^(m-h)`` from the recovered
    coefficients, takes companion-matrix eigenvalues, reattaches the
    separating shifts to the sorted roots and compares against the
    regularised root values.  Failures are recorded, not raised.
    """
    from .reduction import companion_matrix_from_coefficients

    if trials < 1:
        raise InvalidParameterError("need at least one trial")
    rng = rng or np.random.default_rng(0)
    scale = omega if isinstance(omega, OmegaScale) else constant_scale(float(omega))
    reg = regularise_roots(family, mollifier, scale)
    m, n = family.order, family.dimension
    sets = {j: recover_coefficients(reg, j, n, epsilon) for j in range(1, m + 1)}
    w = reg.omega_of(epsilon)
    probes: list[RoundTripProbe] = []
    failures: list[str] = []
    worst = 0.0
    for _ in range(trials):
        t = float(rng.uniform(0.0, family.horizon))
        xi = tuple(rng.uniform(0.3, 2.5, size=n))
        try:
            coeffs = np.ones(m + 1)
            for h in range(1, m + 1):
                coeffs[h] = float(sets[h].sigma_hat(t, xi))
            eig = np.linalg.eigvals(companion_matrix_from_coefficients(coeffs))
            pure = np.sort(np.real(eig))
            shifted = pure + (np.arange(1, m + 1)) * w * bracket_norm(xi)
            reference = reg.values(t, xi, epsilon)
            ref_scale = max(1.0, float(np.max(np.abs(reference))))
            err = float(np.max(np.abs(shifted - reference))) / ref_scale
            probes.append(RoundTripProbe(t, xi, err))
            worst = max(worst, err)
        except Exception as exc:  # reported, not thrown
            failures.append(f"probe (t={t:.6g}, xi={xi}): {exc}")
    plan_warnings = tuple(wrn for s in sets.values() for wrn in s.plan.warnings)
    return RoundTripReport(worst, tuple(probes), failures=tuple(failures),
                           plan_warnings=plan_warnings)


# -- random families ---------------------------------------------------------------


def random_ordered_family(rng: np.random.Generator, order: int, dimension: int,
                          horizon: float = 1.0, gap: float = 0.8) -> RootFamily:
    """Random ordered bounded family from piecewise-constant linear forms.

    Coefficients of consecutive roots increase componentwise by at least
    0.4*gap, which orders the family on the closed positive orthant; probes
    and plans only sample there.  Linear-form symbols keep every symmetric
    function exactly polynomial, which is what makes the round trip exact.
    """
    coeff_profiles = []
    for j in range(1, order + 1):
        row = []
        for _ in range(dimension):
            n_breaks = int(rng.integers(1, 4))
            inner = np.sort(rng.uniform(0.1 * horizon, 0.9 * horizon, n_breaks))
            breaks = [0.0] + [float(b) for b in inner] + [horizon]
            vals = j * gap + rng.uniform(0.0, 0.6 * gap, size=n_breaks + 1)
            row.append(piecewise_constant_profile(breaks, list(vals),
                                                  (0.0, horizon)))
        coeff_profiles.append(row)
    return roots_from_linear_forms(coeff_profiles, horizon=horizon)


@dataclass(frozen=True)
class RoundTripStudy:
    max_rel_error: float
    rows: tuple[tuple[int, int, float], ...]  # (order, dimension, rel_error)
    failures: tuple[str, ...]


def random_round_trip_study(n_families: int, mollifier: Mollifier,
                            omega: OmegaScale | float,
                            rng: np.random.Generator,
                            max_order: int = 4, max_dimension: int = 3,
                            probes_per_family: int = 2,
                            epsilon: float = 0.5) -> RoundTripStudy:
    """Round trips over random families sweeping orders and dimensions."""
    rows: list[tuple[int, int, float]] = []
    failures: list[str] = []
    worst = 0.0
    for i in range(n_families):
        order = 1 + i % max_order
        dimension = 1 + (i // max_order) % max_dimension
        family = random_ordered_family(rng, order, dimension)
        report = round_trip_check(family, mollifier, omega,
                                  trials=probes_per_family,
                                  epsilon=epsilon, rng=rng)
        rows.append((order, dimension, report.max_rel_error))
        failures.extend(report.failures)
        worst = max(worst, report.max_rel_error)
    return RoundTripStudy(worst, tuple(rows), tuple(failures))
