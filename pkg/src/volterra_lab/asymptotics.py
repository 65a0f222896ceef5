"""Asymptotic decay laws for s-number sequences.

Fits are ordinary least squares in log scale; finite truncations cannot
realize limits, so limit verdicts are trend-based with fixed thresholds
(see ``DiagnosticsConfig``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData, InvalidParameter, ZeroInWindow
from .linalg import SNumberSequence


@dataclass(frozen=True)
class DiagnosticsConfig:
    """Fixed verdict thresholds (reproducibility over cleverness)."""

    dip_tolerance: float = 0.05        # allowed relative dip in a "divergent" trend
    spread_tolerance: float = 0.10     # max relative spread for a limit verdict
    growth_factor: float = 1.5         # minimum growth over the last decade
    min_points: int = 8                # smallest usable fit window
    trend_samples: int = 48            # geometric sample count for diagnostics
    # sub-polynomial decay detection in estimate_schatten_order
    subpoly_alpha_cutoff: float = 0.05
    subpoly_alpha_ceiling: float = 0.5
    subpoly_drift_ratio: float = 0.85
    subpoly_min_points: int = 32


DEFAULTS = DiagnosticsConfig()


@dataclass(frozen=True)
class DecayProfile:
    """Fitted law s_n ~ a * n^(-alpha) or s_n ~ a * (ln n)^beta."""

    kind: str                       # "power_law" | "slowly_varying_log"
    a: float
    fit_window: tuple[int, int]
    residual: float                 # RMS residual of the fit in log scale
    alpha: float | None = None      # power_law only
    beta: float | None = None       # slowly_varying_log only

    def __post_init__(self):
        if not (self.a > 0):
            raise InvalidParameter("fitted coefficient a must be positive")
        n_min, n_max = self.fit_window
        if not (n_max > n_min >= 2):
            raise InvalidParameter(f"bad fit window {self.fit_window}")
        if self.residual < 0:
            raise InvalidParameter("residual must be nonnegative")


@dataclass(frozen=True)
class LimitDiagnostics:
    """Trend samples for n^2 s_n and n^alpha s_n at geometric n."""

    n2_trend: tuple[tuple[int, float], ...]
    nalpha_trend: tuple[tuple[int, float], ...]
    verdict_n2_divergent: bool
    verdict_nalpha_limit: float | None


def log_power(x, beta: float):
    """Slowly varying law L(x) = (ln x)^beta, defined for x > 1."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 1.0):
        raise InvalidParameter("log_power requires x > 1")
    out = np.log(x) ** beta
    return float(out) if out.ndim == 0 else out


def _sequence_values(s) -> np.ndarray:
    if isinstance(s, SNumberSequence):
        return s.values
    return np.asarray(s, dtype=float)


def _window_slice(s, window, min_n: int = 2) -> tuple[np.ndarray, np.ndarray]:
    values = _sequence_values(s)
    n_min, n_max = int(window[0]), int(window[1])
    if n_min < min_n or n_max <= n_min:
        raise InvalidParameter(f"window ({n_min}, {n_max}) must satisfy n_max > n_min >= {min_n}")
    if n_max > values.size:
        raise InvalidParameter(f"window end {n_max} exceeds sequence length {values.size}")
    if n_max - n_min + 1 < DEFAULTS.min_points:
        raise InsufficientData(f"window ({n_min}, {n_max}) has fewer than {DEFAULTS.min_points} points")
    y = values[n_min - 1:n_max]
    if np.any(y <= 0):
        raise ZeroInWindow(f"window ({n_min}, {n_max}) contains a nonpositive value")
    return np.arange(n_min, n_max + 1, dtype=float), y


def _least_squares_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return float(slope), float(intercept), float(np.sqrt(np.mean(resid**2)))


def fit_power_law(s, window) -> DecayProfile:
    """Fit ln s_n = ln a - alpha ln n over the window (1-based ranks)."""
    n, y = _window_slice(s, window)
    slope, intercept, rms = _least_squares_line(np.log(n), np.log(y))
    return DecayProfile(kind="power_law", a=math.exp(intercept), alpha=-slope,
                        fit_window=(int(window[0]), int(window[1])), residual=rms)


def fit_slowly_varying_log(s, window) -> DecayProfile:
    """Fit ln s_n = ln a + beta ln ln n over the window; requires n_min >= 3."""
    n, y = _window_slice(s, window, min_n=3)
    slope, intercept, rms = _least_squares_line(np.log(np.log(n)), np.log(y))
    return DecayProfile(kind="slowly_varying_log", a=math.exp(intercept), beta=slope,
                        fit_window=(int(window[0]), int(window[1])), residual=rms)


def estimate_schatten_order(s, window) -> float:
    """Schatten order 1/alpha from the power-law fit, or ``math.inf``.

    ``math.inf`` marks sub-polynomial decay, where the sequence belongs to
    no finite Schatten class.  That is declared either when the fitted
    exponent is below ``subpoly_alpha_cutoff``, or when the window is wide
    enough to split and the local exponent collapses from the left half to
    the right half (ratio <= ``subpoly_drift_ratio``) while a slowly varying
    ln-power model explains the data strictly better than a power law.  A
    genuine power law has a window-independent exponent, so it never trips
    the drift test.
    """
    profile = fit_power_law(s, window)
    alpha = profile.alpha
    if alpha <= DEFAULTS.subpoly_alpha_cutoff:
        return math.inf
    n_min, n_max = profile.fit_window
    if n_max - n_min + 1 >= DEFAULTS.subpoly_min_points and alpha < DEFAULTS.subpoly_alpha_ceiling:
        n_mid = int(round(math.sqrt(n_min * n_max)))
        lo = fit_power_law(s, (n_min, n_mid))
        hi = fit_power_law(s, (n_mid, n_max))
        if lo.alpha > 0 and hi.alpha / lo.alpha <= DEFAULTS.subpoly_drift_ratio:
            if fit_slowly_varying_log(s, window).residual < profile.residual:
                return math.inf
    return 1.0 / alpha


def limit_diagnostics(s, alpha: float) -> LimitDiagnostics:
    """Trend verdicts for lim n^2 s_n = inf and lim n^alpha s_n = a."""
    if not (0.0 < alpha < 2.0):
        raise InvalidParameter(f"alpha must lie in (0, 2), got {alpha}")
    values = _sequence_values(s)
    n_top = values.size
    if n_top < 4:
        raise InvalidParameter("sequence too short for diagnostics")
    grid = np.unique(np.geomspace(2, n_top, DEFAULTS.trend_samples).astype(int))
    n2 = [(int(n), float(n**2 * values[n - 1])) for n in grid]
    na = [(int(n), float(n**alpha * values[n - 1])) for n in grid]

    last = [v for (n, v) in n2 if n >= n_top / 10]
    divergent = False
    if len(last) >= 2:
        ratios = np.array(last[1:]) / np.array(last[:-1])
        divergent = bool(np.all(ratios >= 1.0 - DEFAULTS.dip_tolerance)
                         and last[-1] >= DEFAULTS.growth_factor * last[0])

    last_a = np.array([v for (n, v) in na if n >= n_top / 10])
    limit = None
    if last_a.size >= 2 and last_a.mean() > 0:
        spread = (last_a.max() - last_a.min()) / last_a.mean()
        if spread < DEFAULTS.spread_tolerance:
            limit = float(last_a.mean())

    return LimitDiagnostics(n2_trend=tuple(n2), nalpha_trend=tuple(na),
                            verdict_n2_divergent=divergent, verdict_nalpha_limit=limit)
