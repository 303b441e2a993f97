"""Per-frequency integration, synthesis, energy traces, residual checks.

Space is one-dimensional and periodic: the box is sized so that the causal
cone of the compactly supported data never meets its periodic images within
the time horizon, making the discrete transform an exact stand-in for the
line transform.  Each frequency carries an independent companion ODE,
integrated with fixed-step fourth-order Runge-Kutta; frequencies are chunked
for optional threading and merged in frequency order, so results are
bit-identical for every worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (ConfigurationError, DivergenceError,
                     InvalidParameterError, StabilityError)
from .mollifiers import GevreyCutoffMollifier, Mollifier, convolve_profile, \
    scale_mollifier
from .profiles import RoughProfile
from .recovery import recover_coefficients
from .reduction import (CompanionSystem, ForcingPart, InitialData,
                        LowerOrderPart, LowerTerm, RootValuePrincipal,
                        build_companion)
from .roots import OmegaScale, RegularisedRoots, RootFamily, bracket, \
    regularise_roots
from .symmetrisers import build_symmetriser
from ._stats import linear_fit

Array = np.ndarray

_CHUNK = 256  # fixed frequency chunk width; workers map over chunks


@dataclass(frozen=True)
class FrequencyGrid:
    """Periodic frequency grid: K points on a box of length L around 0."""

    points: int
    box_length: float

    def __post_init__(self):
        if self.points < 2 or self.points & (self.points - 1):
            raise ConfigurationError("grid points must be a power of two",
                                     field="grid.points")
        if self.box_length <= 0:
            raise ConfigurationError("box length must be positive",
                                     field="grid.box_length")

    @property
    def frequencies(self) -> Array:
        return 2.0 * math.pi * np.fft.fftfreq(self.points,
                                              d=self.box_length / self.points)

    @property
    def x_nodes(self) -> Array:
        return -0.5 * self.box_length \
            + self.box_length * np.arange(self.points) / self.points

    def check_fit(self, support_radius: float, max_speed: float,
                  horizon: float, margin: float = 0.5) -> None:
        needed = support_radius + max_speed * horizon + margin
        if needed > 0.5 * self.box_length:
            raise ConfigurationError(
                f"box length {self.box_length:g} too small: causal cone "
                f"needs at least {2 * needed:g}", field="grid.box_length")

    def synthesise(self, uhat: Array) -> Array:
        """Inverse transform of line-transform samples onto the x nodes.

        The x nodes start at -L/2, which shows up as the phase factor
        exp(i xi x0) relative to the raw FFT convention.
        """
        phase = np.exp(1j * self.frequencies * self.x_nodes[0])
        return (self.points / self.box_length) * np.fft.ifft(uhat * phase,
                                                             axis=-1)

    def analyse(self, u: Array) -> Array:
        phase = np.exp(-1j * self.frequencies * self.x_nodes[0])
        return (self.box_length / self.points) * np.fft.fft(u, axis=-1) * phase


def auto_box_length(support_radius: float, max_speed: float, horizon: float,
                    margin: float = 1.0) -> float:
    return 2.0 * (support_radius + max_speed * horizon + margin)


# -- integrator -----------------------------------------------------------------


@dataclass
class IntegrationResult:
    traces: Array                  # (m, n_tracked, nt + 1)
    tracked_indices: tuple[int, ...]
    first_component: Array | None  # (n_out, K) or (nt + 1, K) when dense
    output_steps: tuple[int, ...]
    final_state: Array             # (m, K)
    step_doubling_max: float
    steps: int


def _estimate_norm(system: CompanionSystem, t_samples: Array,
                   xi: Array) -> float:
    worst = 0.0
    for t in t_samples:
        mats = system.A(float(t), xi).astype(complex) + system.B(float(t), xi)
        stacked = np.moveaxis(mats, -1, 0)
        svals = np.linalg.svd(stacked, compute_uv=False)
        worst = max(worst, float(svals[:, 0].max()))
    return worst


def integrate_companion(system: CompanionSystem, xi: Array, t_grid: Array,
                        epsilon: float | None = None,
                        tracked_indices: Sequence[int] = (),
                        output_steps: Sequence[int] = (),
                        dense_first_component: bool = False,
                        jobs: int = 1,
                        monitor_stride: int | None = None) -> IntegrationResult:
    """Fixed-step RK4 for D_t V = (A + B) V + F over a frequency batch.

    The step must satisfy h * max||A + B|| <= 0.5 (sampled); otherwise the
    integration refuses and reports the required step.  Local error is spot
    checked by step doubling on roughly one percent of the steps.  The
    frequency axis is processed in fixed-size chunks merged by index, so the
    result does not depend on ``jobs``.
    """
    xi = np.asarray(xi, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    nt = t_grid.size - 1
    if nt < 1:
        raise InvalidParameterError("time grid needs at least two points")
    h = float(t_grid[1] - t_grid[0])
    if not np.allclose(np.diff(t_grid), h, rtol=1e-12, atol=1e-14):
        raise InvalidParameterError("time grid must be uniform")

    sample = t_grid[:: max(1, nt // 8)]
    norm = _estimate_norm(system, sample, xi)
    if h * norm > 0.5 + 1e-12:
        required_step = 0.5 / norm
        required = int(math.ceil((t_grid[-1] - t_grid[0]) / required_step))
        raise StabilityError(
            f"step {h:.3e} violates stability budget: h*||A+B|| = "
            f"{h * norm:.3f} > 0.5; need at least {required} steps",
            required_step=required_step, required_steps=required)

    quarter = t_grid[0] + 0.25 * h * np.arange(4 * nt + 1)
    m = system.order
    k_total = xi.size
    tracked = tuple(int(i) for i in tracked_indices)
    out_steps = tuple(int(i) for i in output_steps)
    stride = monitor_stride if monitor_stride is not None else max(1, nt // 100)

    traces = np.zeros((m, len(tracked), nt + 1), dtype=complex)
    if dense_first_component:
        first = np.zeros((nt + 1, k_total), dtype=complex)
    elif out_steps:
        first = np.zeros((len(out_steps), k_total), dtype=complex)
    else:
        first = None
    final_state = np.zeros((m, k_total), dtype=complex)
    bounds = [(lo, min(lo + _CHUNK, k_total))
              for lo in range(0, k_total, _CHUNK)]
    doubling = np.zeros(len(bounds))

    def run_chunk(chunk_index: int, lo: int, hi: int) -> None:
        xi_c = xi[lo:hi]
        br = bracket(xi_c)
        ibr = 1j * br
        prow = system.principal.row_provider(quarter, xi_c)
        brow = system.lower.row_provider(quarter, xi_c) \
            if system.lower is not None else None
        fprov = system.forcing.values_provider(quarter, xi_c) \
            if system.forcing is not None else None
        v = system.V0(xi_c).astype(complex)
        if v.ndim == 1:
            v = v[:, None]

        def rhs(idx: int, state: Array) -> Array:
            rows = prow(idx).astype(complex)
            if brow is not None:
                rows = rows + brow(idx)
            out = np.empty_like(state)
            out[:-1] = ibr * state[1:]
            last = (rows * state).sum(axis=0)
            if fprov is not None:
                last = last + fprov(idx)
            out[-1] = 1j * last
            return out

        def rk4_step(idx0: int, dt: float, state: Array) -> Array:
            k1 = rhs(idx0, state)
            k2 = rhs(idx0 + 1, state + 0.5 * dt * k1)
            k3 = rhs(idx0 + 1, state + 0.5 * dt * k2)
            k4 = rhs(idx0 + 2, state + dt * k3)
            return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        local_tracked = [(pos, g - lo) for pos, g in enumerate(tracked)
                         if lo <= g < hi]
        for pos, col in local_tracked:
            traces[:, pos, 0] = v[:, col]
        if dense_first_component:
            first[0, lo:hi] = v[0]
        elif out_steps and 0 in out_steps:
            first[out_steps.index(0), lo:hi] = v[0]
        worst_double = 0.0
        for i in range(nt):
            base = 4 * i
            v_new = rk4_step(base, h, v)
            if i % stride == 0:
                half = rk4_step(base, 0.5 * h, v)
                half = rk4_step(base + 2, 0.5 * h, half)
                scale = float(np.max(np.abs(v_new))) or 1.0
                worst_double = max(worst_double, float(
                    np.max(np.abs(v_new - half))) / scale)
            v = v_new
            if i % 64 == 0 and not np.all(np.isfinite(v.view(float))):
                bad = np.flatnonzero(~np.isfinite(v).all(axis=0))[0]
                raise DivergenceError(
                    f"non-finite state at t={t_grid[i + 1]:g}",
                    xi=float(xi_c[bad]), epsilon=epsilon)
            step = i + 1
            for pos, col in local_tracked:
                traces[:, pos, step] = v[:, col]
            if dense_first_component:
                first[step, lo:hi] = v[0]
            elif out_steps and step in out_steps:
                first[out_steps.index(step), lo:hi] = v[0]
        final_state[:, lo:hi] = v
        doubling[chunk_index] = worst_double

    # overflow of a diverging state is reported via DivergenceError, not as
    # a numpy warning
    with np.errstate(over="ignore", invalid="ignore"):
        if jobs > 1 and len(bounds) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                list(pool.map(lambda args: run_chunk(*args),
                              [(i, lo, hi) for i, (lo, hi) in
                               enumerate(bounds)]))
        else:
            for i, (lo, hi) in enumerate(bounds):
                run_chunk(i, lo, hi)

    return IntegrationResult(traces=traces, tracked_indices=tracked,
                             first_component=first, output_steps=out_steps,
                             final_state=final_state,
                             step_doubling_max=float(doubling.max()), steps=nt)


def solve_frequency(system: CompanionSystem, xi: float, epsilon: float,
                    t_grid: Array) -> Array:
    """Full amplitude trace V(t) at one frequency, shape (m, len(t_grid))."""
    result = integrate_companion(system, np.array([float(xi)]),
                                 np.asarray(t_grid, dtype=float),
                                 epsilon=epsilon, tracked_indices=(0,))
    return result.traces[:, 0, :]


# -- problem description and the sweep pipeline -----------------------------------


@dataclass(frozen=True)
class LowerTermSpec:
    nu: int
    j: int
    profile: RoughProfile


@dataclass
class VeryWeakProblem:
    """Everything needed to run the regularise/recover/reduce/solve pipeline."""

    family: RootFamily
    data: tuple[RoughProfile, ...]
    grid: FrequencyGrid
    time_steps: int
    horizon: float = 1.0
    lower_terms: tuple[LowerTermSpec, ...] = ()
    forcing: tuple[RoughProfile, RoughProfile] | None = None
    gevrey_s: float = 2.0
    omega: OmegaScale | None = None
    time_mollifier: Mollifier | None = None
    space_mollifier: GevreyCutoffMollifier | None = None
    output_times: tuple[float, ...] = (0.0, 0.5, 1.0)
    tracked_frequencies: tuple[float, ...] = ()
    jobs: int = 1
    run_recovery_diagnostics: bool = True

    @property
    def order(self) -> int:
        return self.family.order


@dataclass
class SolveRecord:
    """One epsilon's worth of gridded output and per-frequency traces."""

    epsilon: float
    omega: float
    u: Array | None = None            # (n_out, K) complex
    uhat: Array | None = None         # (n_out, K) complex
    output_times: tuple[float, ...] = ()
    traces: Array | None = None       # (m, n_tracked, nt + 1)
    trace_times: Array | None = None
    tracked_xi: tuple[float, ...] = ()
    system: CompanionSystem | None = None
    metadata: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.u)))


@dataclass
class SolutionNet:
    """The epsilon-indexed family of regularised solutions."""

    epsilons: tuple[float, ...]
    records: dict[float, SolveRecord]
    grid: FrequencyGrid
    output_times: tuple[float, ...]

    def record(self, epsilon: float) -> SolveRecord:
        return self.records[epsilon]

    def ok_epsilons(self) -> tuple[float, ...]:
        return tuple(e for e in self.epsilons if self.records[e].ok)

    def sup_norms(self) -> dict[float, float]:
        return {e: self.records[e].sup_norm() for e in self.ok_epsilons()}


def _nearest_step(t_grid: Array, t: float) -> int:
    return int(np.argmin(np.abs(t_grid - t)))


def build_regularised_system(problem: VeryWeakProblem, epsilon: float
                             ) -> tuple[CompanionSystem, RegularisedRoots, dict]:
    """Regularise coefficients, data and forcing at one epsilon and reduce."""
    from .mollifiers import friedrichs_mollifier, vanishing_moment_mollifier

    phi = problem.time_mollifier or friedrichs_mollifier()
    rho_base = problem.space_mollifier or GevreyCutoffMollifier(
        vanishing_moment_mollifier(2), 0.5)
    omega = problem.omega
    if omega is None:
        from .roots import linear_scale
        omega = linear_scale()
    reg = regularise_roots(problem.family, phi, omega)
    w = reg.omega_of(epsilon)
    phi_w = scale_mollifier(phi, w)
    rho_w = rho_base.with_scale(w)
    rho_hat_grid = rho_w.fourier_transform(problem.grid.frequencies)

    def regularised_transform(profile: RoughProfile) -> Callable[[Array], Array]:
        def ghat(xi: Array) -> Array:
            return profile.fourier_transform(xi) * rho_hat_grid \
                if xi.shape == rho_hat_grid.shape \
                else profile.fourier_transform(xi) * rho_w.fourier_transform(xi)
        return ghat

    principal = RootValuePrincipal(reg, epsilon)
    lower = None
    if problem.lower_terms:
        terms = tuple(
            LowerTerm(spec.nu, spec.j,
                      convolve_profile(spec.profile, phi_w))
            for spec in problem.lower_terms)
        lower = LowerOrderPart(order=problem.order, terms=terms)
    forcing = None
    if problem.forcing is not None:
        f_time, f_space = problem.forcing
        forcing = ForcingPart(time_values=convolve_profile(f_time, phi_w),
                              xhat=regularised_transform(f_space))
    data = InitialData(tuple(regularised_transform(g) for g in problem.data))
    system = build_companion(principal, lower=lower, forcing=forcing, data=data)
    info = {"omega": w}
    return system, reg, info


def solve_single(problem: VeryWeakProblem, epsilon: float) -> SolveRecord:
    """Run the full pipeline at one epsilon."""
    system, reg, info = build_regularised_system(problem, epsilon)
    w = info["omega"]
    m = problem.order
    grid = problem.grid
    supports = [abs(g.support[0]) for g in problem.data] \
        + [abs(g.support[1]) for g in problem.data]
    if problem.forcing is not None:
        supports += [abs(problem.forcing[1].support[0]),
                     abs(problem.forcing[1].support[1])]
    # support transport speed: |d lambda / d xi| <= bound + m omega
    grid.check_fit(max(supports, default=0.0),
                   system.principal.max_normalised_speed(),
                   problem.horizon)

    t_grid = np.linspace(0.0, problem.horizon, problem.time_steps + 1)
    out_steps = []
    for t in problem.output_times:
        step = _nearest_step(t_grid, t)
        if step not in out_steps:
            out_steps.append(step)
    xi_grid = grid.frequencies
    tracked = []
    for target in problem.tracked_frequencies:
        idx = int(np.argmin(np.abs(xi_grid - target)))
        if idx not in tracked:
            tracked.append(idx)

    result = integrate_companion(system, xi_grid, t_grid, epsilon=epsilon,
                                 tracked_indices=tracked,
                                 output_steps=out_steps, jobs=problem.jobs)
    br = bracket(xi_grid)
    uhat = result.first_component * br[None, :] ** (1 - m)
    u = grid.synthesise(uhat)
    v0 = system.V0(xi_grid)
    ic_residual = 0.0
    if tracked:
        ic_residual = float(np.max(np.abs(
            result.traces[:, :, 0] - v0[:, tracked])))
    metadata = {
        "omega": w,
        "steps": result.steps,
        "step_doubling_max": result.step_doubling_max,
        "initial_condition_residual": ic_residual,
        "imag_fraction": float(np.max(np.abs(u.imag))
                               / max(np.max(np.abs(u)), 1e-300)),
        "tracked_frequency_weights": {
            f"{xi_grid[i]:.6g}": reg.frequency_weights(xi_grid[i])
            for i in tracked},
    }
    if problem.run_recovery_diagnostics:
        t_diag = np.linspace(0.0, problem.horizon, 9)
        residuals = {}
        for j in range(1, m + 1):
            cs = recover_coefficients(reg, j, 1, epsilon)
            residuals[j] = cs.reconstruction_residual(t_diag)
        metadata["recovery_residuals"] = residuals
    return SolveRecord(
        epsilon=epsilon, omega=w, u=u, uhat=uhat,
        output_times=tuple(float(t_grid[s]) for s in result.output_steps),
        traces=result.traces, trace_times=t_grid,
        tracked_xi=tuple(float(xi_grid[i]) for i in tracked),
        system=system, metadata=metadata)


def solve_very_weak(problem: VeryWeakProblem,
                    epsilons: Sequence[float]) -> SolutionNet:
    """Solve the regularised family over a decreasing epsilon sweep.

    Stage failures are attached to their epsilon and the sweep continues;
    outputs are deterministic given the problem (ordered reductions, fixed
    chunking, no randomness).
    """
    eps = [float(e) for e in epsilons]
    if len(eps) < 3:
        raise InvalidParameterError("epsilon sweep needs at least 3 values")
    if any(not 0.0 < e <= 1.0 for e in eps):
        raise InvalidParameterError("epsilon values must lie in (0, 1]")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise InvalidParameterError("epsilon sweep must decrease strictly")
    records: dict[float, SolveRecord] = {}
    for e in eps:
        try:
            records[e] = solve_single(problem, e)
        except Exception as exc:
            records[e] = SolveRecord(epsilon=e, omega=float("nan"),
                                     error=f"{type(exc).__name__}: {exc}")
    return SolutionNet(epsilons=tuple(eps), records=records,
                       grid=problem.grid,
                       output_times=problem.output_times)


# -- energy ---------------------------------------------------------------------


@dataclass
class EnergyTrace:
    """E(t) = (S(t) V, V) at one tracked frequency, with a fitted rate."""

    xi: float
    epsilon: float
    times: Array
    energies: Array
    fitted_rate: float | None
    rate_r_squared: float | None
    forcing_integral: float

    def initial(self) -> float:
        return float(self.energies[0])

    def max_relative_drift(self) -> float:
        e0 = self.initial()
        if e0 <= 0.0:
            return float(np.max(np.abs(self.energies)))
        return float(np.max(np.abs(self.energies - e0)) / e0)


def energy_trace(system: CompanionSystem, trace: Array, times: Array,
                 xi: float, epsilon: float | None = None,
                 sample_stride: int = 1) -> EnergyTrace:
    """Energy time series along one frequency trace.

    The symmetriser is rebuilt from the principal root values at each
    sampled time; the fitted rate is the least-squares slope of log E where
    E is positive.
    """
    times = np.asarray(times, dtype=float)
    trace = np.asarray(trace)
    idx = np.arange(0, times.size, sample_stride)
    br = float(bracket(np.array(xi)))
    energies = np.empty(idx.size)
    xi_arr = np.array([float(xi)])
    for row, i in enumerate(idx):
        lam = system.principal.roots(float(times[i]), xi_arr)[:, 0]
        sym = build_symmetriser(np.sort(lam) / br)
        energies[row] = sym.quadratic_form(trace[:, i])
    forcing_integral = 0.0
    if system.forcing is not None:
        fvals = np.array([abs(system.forcing.values(float(t), xi_arr)[0]) ** 2
                          for t in times[idx]])
        forcing_integral = float(np.trapezoid(fvals, times[idx]))
    positive = energies > 1e-300
    if np.count_nonzero(positive) >= 2:
        slope, _, r2 = linear_fit(times[idx][positive],
                                  np.log(energies[positive]))
        rate, rate_r2 = float(slope), float(r2)
    else:
        rate, rate_r2 = None, None
    return EnergyTrace(xi=float(xi), epsilon=epsilon, times=times[idx],
                       energies=energies, fitted_rate=rate,
                       rate_r_squared=rate_r2,
                       forcing_integral=forcing_integral)


# -- residual check ----------------------------------------------------------------

_DT_STENCILS = {
    1: ((-2, -1, 1, 2), (1 / 12, -8 / 12, 8 / 12, -1 / 12)),
    2: ((-2, -1, 0, 1, 2), (-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12)),
    3: ((-3, -2, -1, 1, 2, 3),
        (-1 / 8, 1.0, -13 / 8, 13 / 8, -1.0, 1 / 8)),
    4: ((-3, -2, -1, 0, 1, 2, 3),
        (-1 / 6, 2.0, -13 / 2, 28 / 3, -13 / 2, 2.0, -1 / 6)),
}


@dataclass(frozen=True)
class ResidualReport:
    relative_l2: float
    interior_steps: tuple[int, int]
    note: str


def residual_check(u_dense: Array, t_grid: Array, grid: FrequencyGrid,
                   system: CompanionSystem) -> ResidualReport:
    """Independent check that a gridded solution solves the regularised PDE.

    Time derivatives are 4th-order finite differences on interior nodes,
    space derivatives are spectral; the coefficients come from the same
    symbol providers the integrator used, but no ODE machinery is shared.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    u_dense = np.asarray(u_dense)
    m = system.order
    nt = t_grid.size - 1
    h = float(t_grid[1] - t_grid[0])
    halo = 3  # widest stencil reaches 3 steps either side
    if nt + 1 <= 2 * halo + 1:
        raise InvalidParameterError("grid too coarse for the residual stencil")
    uhat = grid.analyse(u_dense)
    xi = grid.frequencies
    br = bracket(xi)

    def dt_power(values: Array, k: int) -> Array:
        if k == 0:
            return values[halo:nt + 1 - halo]
        offsets, weights = _DT_STENCILS[k]
        acc = np.zeros((nt + 1 - 2 * halo, values.shape[1]), dtype=complex)
        for off, wgt in zip(offsets, weights):
            acc += wgt * values[halo + off:nt + 1 - halo + off]
        return (-1j) ** k * acc / h ** k

    interior = np.arange(halo, nt + 1 - halo)
    residual = dt_power(uhat, m)
    scale = float(np.linalg.norm(residual))
    for j in range(1, m + 1):
        coeff = np.empty((interior.size, xi.size))
        for row, i in enumerate(interior):
            rows = system.principal.last_row(float(t_grid[i]), xi)
            coeff[row] = rows[m - j] * br ** (j - 1)
        term = coeff * dt_power(uhat, m - j)
        residual = residual - term
        scale = max(scale, float(np.linalg.norm(term)))
    if system.lower is not None:
        for j in range(1, m + 1):
            coeff = np.empty((interior.size, xi.size), dtype=complex)
            for row, i in enumerate(interior):
                rows = system.lower.last_row(float(t_grid[i]), xi)
                coeff[row] = rows[m - j] * br ** (j - 1)
            term = coeff * dt_power(uhat, m - j)
            residual = residual - term
            scale = max(scale, float(np.linalg.norm(term)))
    if system.forcing is not None:
        force = np.empty((interior.size, xi.size), dtype=complex)
        for row, i in enumerate(interior):
            force[row] = system.forcing.values(float(t_grid[i]), xi)
        residual = residual - force
        scale = max(scale, float(np.linalg.norm(force)))
    rel = float(np.linalg.norm(residual)) / max(scale, 1e-300)
    return ResidualReport(relative_l2=rel,
                          interior_steps=(halo, nt - halo),
                          note="interior nodes only; 3-step halo excluded")


# -- classical references -------------------------------------------------------------


def dalembert_reference(g0: RoughProfile, speed: float, t: float,
                        x: Array) -> Array:
    """Zero-velocity wave solution 0.5 (g0(x - ct) + g0(x + ct))."""
    x = np.asarray(x, dtype=float)
    return 0.5 * (np.real(g0.density(x - speed * t))
                  + np.real(g0.density(x + speed * t)))


def transport_reference(g0: RoughProfile, speed: float, t: float,
                        x: Array) -> Array:
    """Solution g0(x + a t) of D_t u - a D_x u = 0."""
    x = np.asarray(x, dtype=float)
    return np.real(g0.density(x + speed * t))
