"""Companion (Sylvester) reduction of scalar problems and block reduction of
first-order systems.

Per frequency the scalar m-th order equation becomes ``D_t V = (A + B)V + F``
with the companion matrix A carrying the weight <xi> on its superdiagonal and
the principal symbols in its last row, so its eigenvalues are exactly the
regularised characteristic roots.  General m x m first-order systems are
reduced to m identical companion blocks through the adjugate of (tau I - A),
computed by the Faddeev-LeVerrier recursion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Protocol, Sequence

import numpy as np

from .errors import (ConfigurationError, HyperbolicityError,
                     InvalidParameterError, NumericalError, UnsupportedError)
from .recovery import HomogeneousCoefficientSet, characteristic_polynomial
from .roots import RegularisedRoots, bracket

Array = np.ndarray


def companion_matrix_from_coefficients(coeffs: Sequence[float]) -> Array:
    """Plain companion matrix of tau^m + sum_h c_h tau^(m-h).

    ``coeffs`` are descending with leading entry 1; the matrix has ones on
    the superdiagonal and ``-c_{m-k}`` in the last row, so its eigenvalues
    are the polynomial roots.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs[0] != 1.0:
        raise InvalidParameterError("leading coefficient must be exactly 1")
    m = coeffs.size - 1
    mat = np.zeros((m, m), dtype=coeffs.dtype)
    for i in range(m - 1):
        mat[i, i + 1] = 1.0
    mat[m - 1, :] = -coeffs[1:][::-1]
    if np.all(np.isreal(mat)):
        return mat.real
    return mat


# -- principal-part providers ---------------------------------------------------


class PrincipalPart(Protocol):
    """Last-row symbols and root values of the companion principal part."""

    order: int

    def roots(self, t: float, xi: Array) -> Array: ...

    def last_row(self, t: float, xi: Array) -> Array: ...

    def row_provider(self, t_grid: Array, xi: Array
                     ) -> Callable[[int], Array]: ...

    def max_normalised_speed(self) -> float: ...


def _rows_from_root_values(lam: Array, br: Array) -> Array:
    """l_(j) = -sigma_{m-j+1}(roots) <xi>^(j-m) from root values (m, K)."""
    m = lam.shape[0]
    sig = characteristic_polynomial(np.moveaxis(lam, 0, -1))  # (K, m+1)
    rows = np.empty_like(lam)
    for j in range(1, m + 1):
        rows[j - 1] = -sig[..., m - j + 1] * br ** (j - m)
    return rows


@dataclass
class RootValuePrincipal:
    """Principal symbols evaluated from regularised root values.

    Carries the separating shift exactly, so the companion eigenvalues are
    the separated regularised roots by construction; no polynomial identity
    in the frequency is needed.
    """

    regularised: RegularisedRoots
    epsilon: float

    @property
    def order(self) -> int:
        return self.regularised.order

    def _lambda_grid(self, t: float, xi: Array) -> Array:
        m = self.order
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        absxi = np.abs(xi)
        br = bracket(xi)
        w = self.regularised.omega_of(self.epsilon)
        lam = np.empty((m, xi.size))
        pos = xi > 0
        neg = xi < 0
        for j in range(1, m + 1):
            row = np.zeros(xi.size)
            if np.any(pos):
                row[pos] = float(np.real(
                    self.regularised.convolved(j, (1.0,), self.epsilon)(t)))
            if np.any(neg):
                row[neg] = float(np.real(
                    self.regularised.convolved(j, (-1.0,), self.epsilon)(t)))
            lam[j - 1] = row * absxi + j * w * br
        return lam

    def roots(self, t: float, xi: Array) -> Array:
        return self._lambda_grid(t, xi)

    def last_row(self, t: float, xi: Array) -> Array:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        return _rows_from_root_values(self._lambda_grid(t, xi), bracket(xi))

    def row_provider(self, t_grid: Array, xi: Array) -> Callable[[int], Array]:
        m = self.order
        reg = self.regularised
        xi = np.asarray(xi, dtype=float)
        absxi = np.abs(xi)
        br = bracket(xi)
        w = reg.omega_of(self.epsilon)
        sep = np.arange(1, m + 1)[:, None] * (w * br)[None, :]
        table = reg.direction_table(np.asarray(t_grid, dtype=float),
                                    self.epsilon, [(1.0,), (-1.0,)])
        tab_pos = table[(1.0,)]
        tab_neg = table[(-1.0,)]
        pos = xi >= 0

        def rows(i: int) -> Array:
            profile = np.where(pos, tab_pos[:, i, None], tab_neg[:, i, None])
            lam = profile * absxi + sep
            return _rows_from_root_values(lam, br)

        return rows

    def max_normalised_speed(self) -> float:
        return self.regularised.base.bound \
            + self.order * self.regularised.omega_of(self.epsilon)


@dataclass
class PolynomialPrincipal:
    """Principal symbols from per-degree coefficient callables (n = 1).

    ``coefficients[d]`` evaluates the degree-d coefficient a_d(t); the last
    row entries are ``a_{m-j+1}(t) xi^{m-j+1} <xi>^{j-m}``.  Root values come
    from companion eigenvalues.
    """

    order: int
    coefficients: Mapping[int, Callable[[Array], Array]]
    speed_bound: float = 1.0

    def __post_init__(self):
        missing = [d for d in range(1, self.order + 1)
                   if d not in self.coefficients]
        if missing:
            raise ConfigurationError(
                f"missing principal coefficient degree(s) {missing}",
                field="principal")

    @staticmethod
    def from_coefficient_sets(sets: Mapping[int, HomogeneousCoefficientSet],
                              speed_bound: float = 1.0) -> "PolynomialPrincipal":
        coeffs = {}
        for degree, cset in sets.items():
            if cset.dimension != 1:
                raise UnsupportedError("companion assembly is one-dimensional")
            coeffs[degree] = cset.coefficient((degree,))
        return PolynomialPrincipal(order=max(sets), coefficients=coeffs,
                                   speed_bound=speed_bound)

    def last_row(self, t: float, xi: Array) -> Array:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        br = bracket(xi)
        m = self.order
        rows = np.empty((m, xi.size))
        for j in range(1, m + 1):
            d = m - j + 1
            a = float(np.real(np.atleast_1d(self.coefficients[d](t))[0]))
            rows[j - 1] = a * xi ** d * br ** (j - m)
        return rows

    def roots(self, t: float, xi: Array) -> Array:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        rows = self.last_row(t, xi)
        br = bracket(xi)
        m = self.order
        lam = np.empty((m, xi.size))
        for k in range(xi.size):
            coeffs = np.ones(m + 1)
            for j in range(1, m + 1):
                coeffs[m - j + 1] = -rows[j - 1, k] * br[k] ** (m - j)
            lam[:, k] = np.sort(
                np.real(np.linalg.eigvals(
                    companion_matrix_from_coefficients(coeffs))))
        return lam

    def row_provider(self, t_grid: Array, xi: Array) -> Callable[[int], Array]:
        t_grid = np.asarray(t_grid, dtype=float)
        xi = np.asarray(xi, dtype=float)
        br = bracket(xi)
        m = self.order
        monomials = np.empty((m, xi.size))
        for j in range(1, m + 1):
            d = m - j + 1
            monomials[j - 1] = xi ** d * br ** (j - m)
        values = np.empty((m, t_grid.size))
        for j in range(1, m + 1):
            d = m - j + 1
            values[j - 1] = np.real(np.asarray(
                self.coefficients[d](t_grid), dtype=complex))

        def rows(i: int) -> Array:
            return values[:, i, None] * monomials

        return rows

    def max_normalised_speed(self) -> float:
        return self.speed_bound


# -- lower order, forcing, data ----------------------------------------------------


@dataclass(frozen=True)
class LowerTerm:
    """One regularised lower-order coefficient b_{nu,j}(t), |nu| < j."""

    nu: int
    j: int
    coefficient: Callable[[Array], Array]

    def __post_init__(self):
        if not 0 <= self.nu < self.j:
            raise InvalidParameterError(
                f"lower-order term needs 0 <= nu < j, got nu={self.nu}, j={self.j}")


@dataclass
class LowerOrderPart:
    """Last-row symbols of the zero-block B: columns collect all b_{nu,j}."""

    order: int
    terms: tuple[LowerTerm, ...]

    def __post_init__(self):
        for term in self.terms:
            if term.j > self.order:
                raise InvalidParameterError(
                    f"lower-order time order {term.j} exceeds equation order")

    def last_row(self, t: float, xi: Array) -> Array:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        br = bracket(xi)
        m = self.order
        row = np.zeros((m, xi.size), dtype=complex)
        for term in self.terms:
            k = m - term.j + 1
            value = complex(np.atleast_1d(term.coefficient(t)).ravel()[0])
            row[k - 1] += value * xi ** term.nu * br ** (k - m)
        return row

    def row_provider(self, t_grid: Array, xi: Array) -> Callable[[int], Array]:
        t_grid = np.asarray(t_grid, dtype=float)
        xi = np.asarray(xi, dtype=float)
        br = bracket(xi)
        m = self.order
        per_term = []
        for term in self.terms:
            k = m - term.j + 1
            factor = xi ** term.nu * br ** (k - m)
            values = np.asarray(term.coefficient(t_grid), dtype=complex)
            per_term.append((k - 1, values, factor))

        def rows(i: int) -> Array:
            row = np.zeros((m, xi.size), dtype=complex)
            for col, values, factor in per_term:
                row[col] += values[i] * factor
            return row

        return rows


@dataclass
class ForcingPart:
    """Transformed forcing f_hat(t, xi), separable in time and frequency."""

    time_values: Callable[[Array], Array]
    xhat: Callable[[Array], Array]

    def values(self, t: float, xi: Array) -> Array:
        tv = complex(np.atleast_1d(self.time_values(t)).ravel()[0])
        return tv * np.asarray(self.xhat(xi), dtype=complex)

    def values_provider(self, t_grid: Array, xi: Array) -> Callable[[int], Array]:
        tv = np.asarray(self.time_values(np.asarray(t_grid, float)),
                        dtype=complex)
        xv = np.asarray(self.xhat(np.asarray(xi, float)), dtype=complex)

        def values(i: int) -> Array:
            return tv[i] * xv

        return values


@dataclass
class InitialData:
    """Transformed data; V0 entries are <xi>^(m-k) ghat_{k-1}(xi)."""

    ghat: tuple[Callable[[Array], Array], ...]

    def v0(self, xi: Array) -> Array:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        br = bracket(xi)
        m = len(self.ghat)
        out = np.empty((m, xi.size), dtype=complex)
        for k in range(1, m + 1):
            out[k - 1] = br ** (m - k) * np.asarray(self.ghat[k - 1](xi),
                                                    dtype=complex)
        return out


# -- companion system ---------------------------------------------------------------


@dataclass
class CompanionSystem:
    """Per-frequency first-order data: D_t V = (A + B) V + F, V(0) = V0."""

    order: int
    principal: PrincipalPart
    lower: LowerOrderPart | None = None
    forcing: ForcingPart | None = None
    data: InitialData | None = None

    def A(self, t: float, xi: Array | float) -> Array:
        xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
        m = self.order
        br = bracket(xi_arr)
        mat = np.zeros((m, m, xi_arr.size))
        for i in range(m - 1):
            mat[i, i + 1] = br
        mat[m - 1, :, :] = self.principal.last_row(t, xi_arr)
        return mat[..., 0] if np.ndim(xi) == 0 else mat

    def B(self, t: float, xi: Array | float) -> Array:
        xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
        m = self.order
        mat = np.zeros((m, m, xi_arr.size), dtype=complex)
        if self.lower is not None:
            mat[m - 1, :, :] = self.lower.last_row(t, xi_arr)
        return mat[..., 0] if np.ndim(xi) == 0 else mat

    def F(self, t: float, xi: Array | float) -> Array:
        xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.zeros((self.order, xi_arr.size), dtype=complex)
        if self.forcing is not None:
            out[self.order - 1] = self.forcing.values(t, xi_arr)
        return out[..., 0] if np.ndim(xi) == 0 else out

    def V0(self, xi: Array | float) -> Array:
        xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
        if self.data is None:
            out = np.zeros((self.order, xi_arr.size), dtype=complex)
        else:
            out = self.data.v0(xi_arr)
        return out[..., 0] if np.ndim(xi) == 0 else out

    def eigenvalues(self, t: float, xi: float) -> Array:
        return np.sort(np.real(np.linalg.eigvals(self.A(t, xi))))


def build_companion(principal: PrincipalPart,
                    lower: LowerOrderPart | None = None,
                    forcing: ForcingPart | None = None,
                    data: InitialData | None = None) -> CompanionSystem:
    """Assemble the companion system; validates sizes against the order."""
    m = principal.order
    if lower is not None and lower.order != m:
        raise ConfigurationError("lower-order block has mismatched order",
                                 field="lower")
    if data is not None and len(data.ghat) != m:
        raise ConfigurationError(
            f"need {m} initial data entries, got {len(data.ghat)}",
            field="data")
    return CompanionSystem(order=m, principal=principal, lower=lower,
                           forcing=forcing, data=data)


# -- adjugate (cofactor) matrices ----------------------------------------------------


def _faddeev(a: Array) -> tuple[list[Array], Array]:
    """Adjugate coefficient matrices and characteristic coefficients of A.

    Returns matrices N_0..N_{m-1} with adj(tau I - A) = sum_k N_k tau^{m-1-k}
    and the descending coefficients [1, c_1, ..., c_m] of det(tau I - A).
    """
    m = a.shape[0]
    eye = np.eye(m, dtype=a.dtype)
    mats = [eye.astype(complex)]
    coeffs = np.empty(m + 1, dtype=complex)
    coeffs[0] = 1.0
    current = eye.astype(complex)
    for k in range(1, m + 1):
        work = a @ current
        coeffs[k] = -np.trace(work) / k
        current = work + coeffs[k] * np.eye(m)
        if k < m:
            mats.append(current)
    return mats, coeffs


@dataclass
class PolynomialMatrix:
    """Matrix of tau-polynomials with (t, xi)-dependent coefficients.

    ``coefficients(t, xi)`` returns an (m, m, m) array whose slice [..., k]
    multiplies tau^k; entry degrees never exceed m - 1, as adjugates of
    (tau I - A) require.
    """

    size: int
    a_eval: Callable[[float, float], Array]
    tolerance: float = 1e-9

    def coefficients(self, t: float, xi: float) -> Array:
        a = np.asarray(self.a_eval(t, xi))
        mats, _ = _faddeev(a)
        out = np.empty((self.size, self.size, self.size), dtype=complex)
        for k, mat in enumerate(mats):
            out[..., self.size - 1 - k] = mat
        return out

    def delta_coefficients(self, t: float, xi: float) -> Array:
        a = np.asarray(self.a_eval(t, xi))
        _, coeffs = _faddeev(a)
        return coeffs

    def evaluate(self, t: float, xi: float, tau: complex) -> Array:
        coeffs = self.coefficients(t, xi)
        out = np.zeros((self.size, self.size), dtype=complex)
        for k in range(self.size):
            out += coeffs[..., k] * tau ** k
        return out

    def verify(self, t: float, xi: float) -> float:
        """Residual of L(tau)(tau I - A) = delta(tau) I at m + 1 tau samples."""
        a = np.asarray(self.a_eval(t, xi))
        mats, coeffs = _faddeev(a)
        worst = 0.0
        norm_a = float(np.linalg.norm(a, 2))
        for tau in range(self.size + 1):
            left = self.evaluate(t, xi, tau) @ (tau * np.eye(self.size) - a)
            delta = np.polyval(coeffs, tau)
            scale = max(1.0, (1.0 + abs(tau) + norm_a) ** self.size)
            residual = float(np.linalg.norm(
                left - delta * np.eye(self.size), 2)) / scale
            if residual > self.tolerance:
                raise NumericalError(
                    f"adjugate identity residual {residual:.3e} at tau={tau} "
                    f"(t={t}, xi={xi})")
            worst = max(worst, residual)
        return worst


def cofactor_matrix(a_eval: Callable[[float, float], Array],
                    size: int, tolerance: float = 1e-9) -> PolynomialMatrix:
    """Adjugate of (tau I - A(t, xi)) as a polynomial matrix in tau."""
    if size > 4:
        raise UnsupportedError("adjugate reduction is capped at order 4")
    return PolynomialMatrix(size=size, a_eval=a_eval, tolerance=tolerance)


# -- first-order systems and block reduction ------------------------------------------

_FD4 = {
    1: ((-2, -1, 1, 2), (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)),
    2: ((-2, -1, 0, 1, 2),
        (-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0)),
    3: ((-3, -2, -1, 1, 2, 3),
        (-1.0 / 8.0, 1.0, -13.0 / 8.0, 13.0 / 8.0, -1.0, 1.0 / 8.0)),
}


def _dt_matrix(fn: Callable[[float], Array], t: float, order: int,
               h: float) -> Array:
    """(D_t^order fn)(t) with D_t = -i d/dt, 4th order central differences."""
    if order == 0:
        return np.asarray(fn(t), dtype=complex)
    offsets, weights = _FD4[order]
    acc = None
    for off, wgt in zip(offsets, weights):
        term = wgt * np.asarray(fn(t + off * h), dtype=complex)
        acc = term if acc is None else acc + term
    return (-1j) ** order * acc / h ** order


@dataclass
class FirstOrderSystem:
    """D_t u = A(t, D_x) u + B(t) u + F, u(0) = g0, in one space dimension.

    ``a1`` evaluates the first-order symbol matrix: A(t, xi) = a1(t) * xi.
    ``b`` is the regularised zero-order matrix (smooth in t).  Forcing
    components must be density-type in time; time atoms would have no
    grid realisation under the adjugate's D_t powers.
    """

    order: int
    a1: Callable[[float], Array]
    b: Callable[[float], Array] | None = None
    forcing: tuple[ForcingPart | None, ...] | None = None
    data: tuple[Callable[[Array], Array], ...] | None = None
    horizon: float = 1.0

    def a_symbol(self, t: float, xi: float) -> Array:
        return np.asarray(self.a1(t), dtype=float) * xi

    def check_hyperbolic(self, t_samples: Array, tol: float = 1e-9) -> None:
        for t in np.atleast_1d(t_samples):
            eig = np.linalg.eigvals(np.asarray(self.a1(float(t)), dtype=float))
            scale = max(1.0, float(np.max(np.abs(eig))))
            if float(np.max(np.abs(eig.imag))) > tol * scale:
                raise HyperbolicityError(
                    f"system matrix has non-real eigenvalue at t={float(t):g}")


@dataclass
class BlockSylvesterSystem:
    """m identical companion blocks from delta = det(tau I - A), plus the
    transformed lower-order matrix, forcing and data."""

    system: FirstOrderSystem
    fd_step: float = 1e-3

    @property
    def block_count(self) -> int:
        return self.system.order

    @property
    def block_size(self) -> int:
        return self.system.order

    @property
    def total_size(self) -> int:
        return self.system.order ** 2

    def _adjugate(self, t: float, xi: float) -> tuple[list[Array], Array]:
        return _faddeev(self.system.a_symbol(t, xi))

    def delta_coefficients(self, t: float, xi: float) -> Array:
        return self._adjugate(t, xi)[1]

    def block(self, t: float, xi: float) -> Array:
        m = self.system.order
        br = float(bracket(xi))
        coeffs = self.delta_coefficients(t, xi)
        mat = np.zeros((m, m), dtype=complex)
        for i in range(m - 1):
            mat[i, i + 1] = br
        for h in range(m):
            mat[m - 1, h] = -coeffs[m - h] * br ** (h + 1 - m)
        if np.max(np.abs(mat.imag)) == 0.0:
            return mat.real
        return mat

    def full_principal(self, t: float, xi: float) -> Array:
        return np.kron(np.eye(self.block_count), self.block(t, xi))

    def block_eigenvalues(self, t: float, xi: float) -> Array:
        return np.sort(np.real(np.linalg.eigvals(self.block(t, xi))))

    def _tau_weights(self, t: float, xi: float) -> Array:
        """W_q: coefficient of D_t^q u on the right of the reduced equation.

        Applying L(t, D_t, xi) to (D_t - A - B)u leaves delta(D_t)u plus the
        Leibniz spill-over of D_t powers landing on the coefficients:
        delta(D_t)u = sum_q W_q D_t^q u + L F with
        W_q = sum_{i>=1} C(q+i, i) N~_{q+i} (D_t^i A)
            + sum_{i>=0} C(q+i, i) N~_{q+i} (D_t^i B).
        """
        m = self.system.order
        mats, _ = self._adjugate(t, xi)
        # ascending adjugate coefficients: N~_q multiplies tau^q
        ascending = [mats[m - 1 - q] for q in range(m)]
        weights = np.zeros((m, m, m), dtype=complex)  # (q, m, m)
        h = self.fd_step
        for q in range(m):
            acc = np.zeros((m, m), dtype=complex)
            for i in range(0, m - q):
                p = q + i
                binom = math.comb(p, i)
                if i >= 1:
                    da = _dt_matrix(lambda s: self.system.a_symbol(s, xi),
                                    t, i, h)
                    acc += binom * ascending[p] @ da
                if self.system.b is not None:
                    db = _dt_matrix(self.system.b, t, i, h)
                    acc += binom * ascending[p] @ db
            weights[q] = acc
        return weights

    def lower_matrix(self, t: float, xi: float) -> Array:
        """The m^2 x m^2 lower-order matrix entering D_t U - A U + L U = R."""
        m = self.system.order
        br = float(bracket(xi))
        weights = self._tau_weights(t, xi)
        out = np.zeros((m * m, m * m), dtype=complex)
        for p in range(m):
            row = p * m + (m - 1)
            for q in range(m):
                for p2 in range(m):
                    col = p2 * m + q
                    out[row, col] = -weights[q][p, p2] * br ** (q + 1 - m)
        return out

    def transformed_forcing(self, t_grid: Array, xi: float) -> Array:
        """R(t, xi) on a uniform grid; D_t powers realised by 4th-order
        differences on a 3-step-padded extension of the grid."""
        m = self.system.order
        t_grid = np.asarray(t_grid, dtype=float)
        if self.system.forcing is None:
            return np.zeros((m * m, t_grid.size), dtype=complex)
        dt = float(t_grid[1] - t_grid[0])
        pad = 3
        t_ext = np.concatenate([t_grid[0] + dt * np.arange(-pad, 0), t_grid,
                                t_grid[-1] + dt * np.arange(1, pad + 1)])
        fhat = np.zeros((m, t_ext.size), dtype=complex)
        for p, part in enumerate(self.system.forcing):
            if part is None:
                continue
            xi_arr = np.array([xi])
            for k, s in enumerate(t_ext):
                fhat[p, k] = part.values(float(s), xi_arr)[0]
        derivs = {0: fhat[:, pad:pad + t_grid.size]}
        for q in range(1, m):
            offsets, wts = _FD4[q]
            acc = np.zeros((m, t_grid.size), dtype=complex)
            for off, wgt in zip(offsets, wts):
                acc += wgt * fhat[:, pad + off:pad + off + t_grid.size]
            derivs[q] = (-1j) ** q * acc / dt ** q
        out = np.zeros((m * m, t_grid.size), dtype=complex)
        for k, t in enumerate(t_grid):
            mats, _ = self._adjugate(float(t), xi)
            ascending = [mats[m - 1 - q] for q in range(m)]
            for p in range(m):
                row = p * m + (m - 1)
                total = 0.0 + 0.0j
                for q in range(m):
                    total += ascending[q][p, :] @ derivs[q][:, k]
                out[row, k] = total
        return out

    def transformed_data(self, xi: float) -> Array:
        """U(0) entries D_t^q <D_x>^(m-1-q) u_p(0) via the system recursion."""
        m = self.system.order
        br = float(bracket(xi))
        xi_arr = np.array([xi])
        if self.system.data is None:
            y = [np.zeros(m, dtype=complex)]
        else:
            y = [np.array([np.asarray(g(xi_arr), dtype=complex).ravel()[0]
                           for g in self.system.data])]
        h = self.fd_step

        def rhs_matrix(order: int, t: float) -> Array:
            total = _dt_matrix(lambda s: self.system.a_symbol(s, xi), t, order, h) \
                if order else np.asarray(self.system.a_symbol(t, xi), complex)
            if self.system.b is not None:
                total = total + _dt_matrix(self.system.b, t, order, h)
            return total

        for q in range(1, m):
            total = np.zeros(m, dtype=complex)
            for i in range(q):
                total += math.comb(q - 1, i) * rhs_matrix(i, 0.0) @ y[q - 1 - i]
            if self.system.forcing is not None:
                for p, part in enumerate(self.system.forcing):
                    if part is None:
                        continue
                    total[p] += complex(_dt_matrix(
                        lambda s, _p=part: np.atleast_1d(_p.values(s, xi_arr)),
                        0.0, q - 1, h).ravel()[0])
            y.append(total)
        out = np.zeros(m * m, dtype=complex)
        for p in range(m):
            for q in range(m):
                out[p * m + q] = br ** (m - 1 - q) * y[q][p]
        return out


def to_block_sylvester(system: FirstOrderSystem,
                       fd_step: float = 1e-3,
                       hyperbolicity_samples: int = 17) -> BlockSylvesterSystem:
    """Reduce an m x m first-order system to m identical companion blocks.

    The block eigenvalues coincide with the eigenvalues of A(t, xi) because
    both are the roots of delta(t, tau, xi).  Forcing with time atoms is
    rejected: the adjugate application takes D_t derivatives on a grid.
    """
    t_samples = np.linspace(0.0, system.horizon, hyperbolicity_samples)
    system.check_hyperbolic(t_samples)
    return BlockSylvesterSystem(system=system, fd_step=fd_step)


def random_hyperbolic_system(rng: np.random.Generator, size: int,
                             with_lower: bool = True,
                             horizon: float = 1.0) -> FirstOrderSystem:
    """Well-conditioned random constant-coefficient hyperbolic system."""
    spacing = 0.3
    eigs = np.sort(rng.uniform(-2.0, 2.0, size))
    for i in range(1, size):
        eigs[i] = max(eigs[i], eigs[i - 1] + spacing)
    basis = np.eye(size) + 0.3 * rng.standard_normal((size, size))
    while np.linalg.cond(basis) > 20.0:
        basis = np.eye(size) + 0.3 * rng.standard_normal((size, size))
    a1 = basis @ np.diag(eigs) @ np.linalg.inv(basis)
    b0 = 0.3 * rng.standard_normal((size, size)) if with_lower else None
    return FirstOrderSystem(
        order=size,
        a1=lambda t, _a=a1: _a,
        b=None if b0 is None else (lambda t, _b=b0: _b),
        forcing=None, data=None, horizon=horizon)
