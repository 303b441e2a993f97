"""Tiny ordinary-least-squares helpers shared by the fitting routines."""

from __future__ import annotations

import numpy as np

from .errors import InsufficientDataError


def linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """OLS fit y ~ intercept + slope*x; returns (slope, intercept, r_squared)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise InsufficientDataError("linear fit needs at least 2 samples")
    xm = x - x.mean()
    ym = y - y.mean()
    sxx = float(xm @ xm)
    if sxx == 0.0:
        raise InsufficientDataError("linear fit needs distinct abscissae")
    slope = float(xm @ ym) / sxx
    intercept = float(y.mean() - slope * x.mean())
    syy = float(ym @ ym)
    r2 = 1.0 if syy == 0.0 else float((xm @ ym) ** 2 / (sxx * syy))
    return slope, intercept, r2
