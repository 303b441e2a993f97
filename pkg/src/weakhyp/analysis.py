"""Moderateness exponents, Gevrey-type transform envelopes, net convergence.

These are the quantitative readouts of a solution net: how fast sup-norms
blow up along the sweep (the moderateness exponent), whether transforms obey
decay or growth envelopes of Gevrey type, and whether the net is Cauchy in a
computable seminorm, optionally against a classical reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ._stats import linear_fit
from .errors import AlignmentError, InsufficientDataError, InvalidParameterError
from .roots import RootFamily, bracket
from .solver import SolutionNet

Array = np.ndarray


@dataclass(frozen=True)
class RegularisedNet:
    """Sup-norm data of an eps-indexed family of regularised objects."""

    name: str
    sup_norms: tuple[tuple[float, float], ...]  # (eps, sup)


# -- moderateness ------------------------------------------------------------------


@dataclass(frozen=True)
class ModeratenessReport:
    target: str
    s: float
    n_hat: float
    r_squared: float
    sup_table: tuple[tuple[float, float], ...]
    n_hat_drop_largest: float | None
    span_decades: float
    trivially_moderate: bool
    envelope_prefactor: float | None = None
    envelope_n: float | None = None
    envelope_c: float | None = None
    envelope_ok: bool = False


def _sup_table(net) -> tuple[tuple[float, float], ...]:
    if isinstance(net, SolutionNet):
        return tuple(sorted(net.sup_norms().items(), reverse=True))
    if isinstance(net, RegularisedNet):
        return tuple(sorted(net.sup_norms, reverse=True))
    if isinstance(net, Mapping):
        return tuple(sorted(((float(k), float(v)) for k, v in net.items()),
                            reverse=True))
    raise InvalidParameterError(f"cannot read sup norms from {type(net)!r}")


def fit_moderateness(net, s: float, nu: float = 1.0,
                     target: str = "solution") -> ModeratenessReport:
    """Regress log sup-norms on log(1/eps), plus the transform envelope.

    The envelope |u_hat| <= c' eps^-N exp(-c eps^(1/s) <xi>^(1/s)) is fitted
    with N pinned to the sup-norm exponent, leaving the two parameters
    (c', c) to least squares over the (eps, xi) samples.  An identically
    zero net short-circuits to the trivially moderate report.
    """
    table = _sup_table(net)
    if len(table) < 4:
        raise InsufficientDataError("moderateness fit needs >= 4 epsilon samples")
    eps = np.array([row[0] for row in table])
    sups = np.array([row[1] for row in table])
    span = float(np.log10(eps.max() / eps.min()))
    if np.all(sups <= 0.0):
        return ModeratenessReport(target=target, s=s, n_hat=0.0, r_squared=1.0,
                                  sup_table=table, n_hat_drop_largest=0.0,
                                  span_decades=span, trivially_moderate=True)
    positive = sups > 0.0
    slope, _, r2 = linear_fit(np.log(1.0 / eps[positive]),
                              np.log(sups[positive]))
    drop = None
    if np.count_nonzero(positive) > 2:
        keep = positive.copy()
        keep[int(np.argmax(eps))] = False
        if np.count_nonzero(keep) >= 2:
            drop, _, _ = linear_fit(np.log(1.0 / eps[keep]),
                                    np.log(sups[keep]))
    report = ModeratenessReport(target=target, s=s, n_hat=float(slope),
                                r_squared=float(r2), sup_table=table,
                                n_hat_drop_largest=drop, span_decades=span,
                                trivially_moderate=False)
    if isinstance(net, SolutionNet):
        report = _with_envelope(report, net, s)
    return report


def _with_envelope(report: ModeratenessReport, net: SolutionNet,
                   s: float) -> ModeratenessReport:
    xi = net.grid.frequencies
    br_pow = bracket(xi) ** (1.0 / s)
    rows_y = []
    rows_w = []
    for e in net.ok_epsilons():
        rec = net.record(e)
        amp = np.max(np.abs(rec.uhat), axis=0)
        mask = amp > 1e-14 * max(float(amp.max()), 1e-300)
        y = np.log(amp[mask]) - report.n_hat * np.log(1.0 / e)
        rows_y.append(y)
        rows_w.append(e ** (1.0 / s) * br_pow[mask])
    y_all = np.concatenate(rows_y)
    w_all = np.concatenate(rows_w)
    design = np.column_stack([np.ones_like(w_all), -w_all])
    sol, *_ = np.linalg.lstsq(design, y_all, rcond=None)
    prefactor = float(math.exp(min(sol[0], 700.0)))
    c_fit = float(sol[1])
    return ModeratenessReport(
        target=report.target, s=report.s, n_hat=report.n_hat,
        r_squared=report.r_squared, sup_table=report.sup_table,
        n_hat_drop_largest=report.n_hat_drop_largest,
        span_decades=report.span_decades,
        trivially_moderate=report.trivially_moderate,
        envelope_prefactor=prefactor, envelope_n=report.n_hat,
        envelope_c=c_fit, envelope_ok=c_fit > 0.0)


# -- Gevrey transform envelopes -------------------------------------------------------


@dataclass(frozen=True)
class GevreyFourierFit:
    s: float
    decay_c: float
    decay_delta: float
    decay_ok: bool
    growth_c: float
    growth_nu: float
    zero: bool


def gevrey_fourier_check(uhat: Array, xi: Array, s: float,
                         floor_factor: float = 1e-14) -> GevreyFourierFit:
    """Fit |u_hat(xi)| against exp(+/- rate <xi>^(1/s)) envelopes.

    A positive fitted decay rate marks Gevrey-function-type data; absent
    decay (rate <= 0) the growth envelope of compactly supported
    ultradistribution type is reported instead, with nu clipped at zero.
    """
    uhat = np.asarray(uhat)
    xi = np.asarray(xi, dtype=float)
    if xi.size == 0 or uhat.size == 0:
        raise InvalidParameterError("empty frequency grid")
    amp = np.abs(uhat)
    top = float(amp.max())
    if top == 0.0:
        return GevreyFourierFit(s=s, decay_c=0.0, decay_delta=math.inf,
                                decay_ok=True, growth_c=0.0, growth_nu=0.0,
                                zero=True)
    mask = amp > floor_factor * top
    weight = bracket(xi[mask]) ** (1.0 / s)
    slope, intercept, _ = linear_fit(weight, np.log(amp[mask]))
    decay_delta = -float(slope)
    c0 = float(math.exp(min(intercept, 700.0)))
    return GevreyFourierFit(s=s, decay_c=c0, decay_delta=decay_delta,
                            decay_ok=decay_delta > 1e-12,
                            growth_c=c0, growth_nu=max(float(slope), 0.0),
                            zero=False)


def proxy_seminorm(uhat: Array, xi: Array, nu: float, s: float) -> float:
    """sup_xi |u_hat(xi)| exp(-nu <xi>^(1/s)): the computable stand-in for
    ultradistributional smallness."""
    weight = np.exp(-nu * bracket(np.asarray(xi, float)) ** (1.0 / s))
    return float(np.max(np.abs(uhat) * weight))


# -- convergence -------------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceReport:
    seminorm: str
    pairwise: tuple[tuple[float, float, float], ...]  # (eps_hi, eps_lo, d)
    ratios: tuple[float, ...]
    mean_ratio: float | None
    non_cauchy: bool
    limit_epsilon: float
    reference_errors: tuple[tuple[float, float], ...] | None


def _record_distance(net: SolutionNet, a, b, seminorm: str, nu: float,
                     s: float) -> float:
    if seminorm == "sup":
        return float(np.max(np.abs(a.u - b.u)))
    xi = net.grid.frequencies
    weight = np.exp(-nu * bracket(xi) ** (1.0 / s))
    return float(np.max(np.abs(a.uhat - b.uhat) * weight))


def convergence_study(net: SolutionNet, reference: Array | None = None,
                      seminorm: str = "fourier_proxy", nu: float = 1.0,
                      s: float = 2.0,
                      require_ratio_two: bool = True) -> ConvergenceReport:
    """Pairwise seminorm differences along the sweep, plus reference errors.

    Flags non-Cauchy behaviour when consecutive difference ratios exceed one
    twice in a row.  ``reference`` must share the gridded shape of the
    records.
    """
    if seminorm not in ("sup", "fourier_proxy"):
        raise InvalidParameterError(f"unknown seminorm {seminorm!r}")
    eps = list(net.ok_epsilons())
    if len(eps) < 3:
        raise InsufficientDataError("convergence study needs >= 3 solved epsilons")
    if require_ratio_two:
        for a, b in zip(eps, eps[1:]):
            if abs(a / b - 2.0) > 0.05:
                raise InvalidParameterError(
                    f"sweep must halve epsilon: got ratio {a / b:g}")
    pairwise = []
    for a, b in zip(eps, eps[1:]):
        d = _record_distance(net, net.record(a), net.record(b), seminorm, nu, s)
        pairwise.append((a, b, d))
    ratios = []
    for (_, _, d0), (_, _, d1) in zip(pairwise, pairwise[1:]):
        ratios.append(d1 / d0 if d0 > 0.0 else 0.0)
    non_cauchy = any(r0 > 1.0 and r1 > 1.0
                     for r0, r1 in zip(ratios, ratios[1:]))
    mean_ratio = float(np.mean(ratios)) if ratios else None
    ref_errors = None
    if reference is not None:
        reference = np.asarray(reference)
        ref_errors = []
        for e in eps:
            rec = net.record(e)
            if np.shape(rec.u) != reference.shape:
                raise AlignmentError(
                    f"reference shape {reference.shape} does not match "
                    f"solution shape {np.shape(rec.u)}")
            if seminorm == "sup":
                err = float(np.max(np.abs(rec.u - reference)))
            else:
                ref_hat = net.grid.analyse(reference)
                weight = np.exp(-nu * bracket(net.grid.frequencies) ** (1.0 / s))
                err = float(np.max(np.abs(rec.uhat - ref_hat) * weight))
            ref_errors.append((e, err))
        ref_errors = tuple(ref_errors)
    return ConvergenceReport(seminorm=seminorm, pairwise=tuple(pairwise),
                             ratios=tuple(ratios), mean_ratio=mean_ratio,
                             non_cauchy=non_cauchy, limit_epsilon=eps[-1],
                             reference_errors=ref_errors)


# -- root-uniformity spot check --------------------------------------------------------


def uniformity_spot_check(family: RootFamily, t_samples: Array,
                          directions: Sequence[Sequence[float]]) -> float:
    """Smallest admissible constant in |r_i - r_j| <= c |r_k - r_{k-1}|.

    Sampled surrogate for the classical-consistency uniformity hypothesis;
    returns infinity when some consecutive pair coincides while another pair
    does not.
    """
    t_samples = np.atleast_1d(np.asarray(t_samples, dtype=float))
    m = family.order
    if m < 2:
        return 1.0
    worst = 1.0
    for d in directions:
        vals = np.array([np.real(family.profile(j, d).density(t_samples))
                         for j in range(1, m + 1)])
        widest = np.max(vals, axis=0) - np.min(vals, axis=0)
        tightest = np.min(np.diff(vals, axis=0), axis=0)
        for w, g in zip(widest, tightest):
            if w <= 0.0:
                continue
            if g <= 0.0:
                return math.inf
            worst = max(worst, float(w / g))
    return worst
