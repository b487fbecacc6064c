"""Quantiles, confidence circles and intervals, coverage, Q-Q data and SSIM."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from scipy import stats
from scipy.special import erfc, ndtri

__all__ = [
    "ConfidenceRegion",
    "CoverageReport",
    "normal_cdf",
    "normal_quantile",
    "rayleigh_quantile",
    "confidence_circle",
    "confidence_interval",
    "contains",
    "hitrate",
    "combine_reports",
    "qq_points",
    "ks_statistic",
    "ssim",
    "regions_csv",
]

CIRCLE, REAL, IMAG = "circle", "real", "imag"

_SQRT2 = math.sqrt(2.0)


def normal_cdf(x):
    return 0.5 * erfc(-np.asarray(x, dtype=float) / _SQRT2)


def normal_quantile(q):
    """Standard normal quantile; scalar in, float out, array in, array out."""
    arr = np.asarray(q, dtype=float)
    if np.any(~(arr > 0)) or np.any(~(arr < 1)):
        raise ValueError("quantile level must lie in (0, 1)")
    x = ndtri(arr)
    if np.ndim(arr) == 0:
        return float(x)
    return x


def rayleigh_quantile(alpha: float) -> float:
    """Upper ``alpha`` point of the unit Rayleigh law, ``sqrt(2 ln(1/alpha))``."""
    if not (0 < alpha <= 1):
        raise ValueError("alpha must lie in (0, 1]")
    return math.sqrt(2.0 * math.log(1.0 / alpha))


@dataclass(eq=False)
class ConfidenceRegion:
    """Circle or axis interval; ``center``/``radius`` may be per-coordinate arrays."""

    center: Union[complex, float, np.ndarray]
    radius: Union[float, np.ndarray]
    kind: str
    alpha: float

    def __post_init__(self):
        if self.kind not in (CIRCLE, REAL, IMAG):
            raise ValueError(f"unknown region kind {self.kind!r}")
        if not (0 < self.alpha < 1):
            raise ValueError("alpha must lie in (0, 1)")
        if np.any(np.asarray(self.radius) < 0):
            raise ValueError("radius must be >= 0")

    def __len__(self):
        return int(np.size(self.center))

    def to_dict(self) -> dict:
        c = np.asarray(self.center)
        return {"kind": self.kind, "alpha": self.alpha,
                "center_re": np.real(c).tolist(), "center_im": np.imag(c).tolist(),
                "radius": np.asarray(self.radius, dtype=float).tolist()}


def _check_alpha(alpha):
    if not (0 < alpha < 1):
        raise ValueError("alpha must lie in (0, 1)")


def _scale(sigma_hat, sigma_hat_ii):
    if np.any(np.asarray(sigma_hat) < 0):
        raise ValueError("sigma_hat must be >= 0")
    if np.any(np.asarray(sigma_hat_ii) <= 0):
        raise ValueError("sigma_hat_ii must be positive")
    return np.asarray(sigma_hat) * np.sqrt(sigma_hat_ii)


def confidence_circle(center, sigma_hat, sigma_hat_ii, n: int, alpha: float) -> ConfidenceRegion:
    _check_alpha(alpha)
    radius = _scale(sigma_hat, sigma_hat_ii) * math.sqrt(math.log(1.0 / alpha)) / math.sqrt(n)
    return ConfidenceRegion(center, radius if np.ndim(radius) else float(radius), CIRCLE, alpha)


def confidence_interval(center, sigma_hat, sigma_hat_ii, n: int, alpha: float,
                        axis: str = REAL) -> ConfidenceRegion:
    """Interval for the real or imaginary part; a complex ``center`` is projected onto ``axis``."""
    _check_alpha(alpha)
    if axis not in (REAL, IMAG):
        raise ValueError("axis must be 'real' or 'imag'")
    c = np.asarray(center)
    c = np.real(c) if axis == REAL else np.imag(c) if np.iscomplexobj(c) else c
    radius = (_scale(sigma_hat, sigma_hat_ii) * normal_quantile(1.0 - alpha / 2.0)
              / math.sqrt(2.0 * n))
    c = c if np.ndim(c) else float(c)
    return ConfidenceRegion(c, radius if np.ndim(radius) else float(radius), axis, alpha)


ROUNDOFF = 1e-12


def contains(region: ConfidenceRegion, value) -> np.ndarray:
    """Membership test; boundary points count as inside.

    Distances within a few ulps of the radius are treated as on the boundary, so
    zero-width regions around an estimate that is exact up to round-off still hit.
    """
    value = np.asarray(value)
    if region.kind == CIRCLE:
        dist = np.abs(np.asarray(region.center) - value)
    elif region.kind == REAL:
        dist = np.abs(np.asarray(region.center) - np.real(value))
    else:
        dist = np.abs(np.asarray(region.center) - np.imag(value))
    scale = max(np.max(np.abs(region.center), initial=0.0), np.max(np.abs(value), initial=0.0))
    slack = ROUNDOFF * scale
    return dist <= np.asarray(region.radius) + slack


@dataclass
class CoverageReport:
    h: float
    h_support: float
    trials: int
    per_coordinate_hits: np.ndarray
    support_empty: bool = False

    def to_dict(self) -> dict:
        return {"h": self.h, "h_support": None if self.support_empty else self.h_support,
                "support_empty": self.support_empty, "trials": self.trials}


def _stack_regions(regions):
    if isinstance(regions, ConfidenceRegion):
        return regions
    regions = list(regions)
    kinds = {r.kind for r in regions}
    alphas = {r.alpha for r in regions}
    if len(kinds) != 1 or len(alphas) != 1:
        raise ValueError("regions must share kind and alpha")
    return ConfidenceRegion(np.array([r.center for r in regions]),
                            np.array([r.radius for r in regions], dtype=float),
                            kinds.pop(), alphas.pop())


def hitrate(beta_true, regions, support: Iterable[int]) -> CoverageReport:
    """Fraction of coordinates (all, and true support only) covered by their region."""
    beta_true = np.asarray(beta_true)
    reg = _stack_regions(regions)
    if len(reg) != beta_true.size:
        raise ValueError("need one region per coordinate")
    hits = np.broadcast_to(contains(reg, beta_true), beta_true.shape).astype(np.int64)
    support = np.asarray(sorted(set(int(i) for i in support)), dtype=np.int64)
    if support.size and (support.min() < 0 or support.max() >= beta_true.size):
        raise ValueError("support index out of range")
    empty = support.size == 0
    h_s = float("nan") if empty else float(hits[support].mean())
    return CoverageReport(float(hits.mean()), h_s, 1, hits, empty)


def combine_reports(reports: Sequence[CoverageReport]) -> CoverageReport:
    """Average per-trial hitrates (the support is fixed across trials)."""
    reports = list(reports)
    if not reports:
        raise ValueError("no reports")
    hits = np.sum([r.per_coordinate_hits for r in reports], axis=0)
    empty = reports[0].support_empty
    h_s = float("nan") if empty else float(np.mean([r.h_support for r in reports]))
    return CoverageReport(float(np.mean([r.h for r in reports])), h_s,
                          sum(r.trials for r in reports), hits, empty)


def qq_points(samples) -> np.ndarray:
    """``(m, 2)`` array of (theoretical, empirical) pairs with Hazen positions ``(i - 0.5)/m``."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    m = x.size
    if m < 2:
        raise ValueError("need at least 2 samples")
    theo = normal_quantile((np.arange(1, m + 1) - 0.5) / m)
    return np.column_stack([theo, x])


def ks_statistic(samples) -> float:
    """One-sample Kolmogorov-Smirnov distance to the standard normal."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty sample")
    return float(stats.kstest(x, "norm").statistic)


def ssim(a, b, window: int = 8, k1: float = 0.01, k2: float = 0.03,
         data_range: Optional[float] = None) -> float:
    """Mean structural similarity over all ``window x window`` patches."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("images must have the same shape")
    if a.ndim == 1:
        a, b = a[None, :], b[None, :]
    if a.ndim != 2:
        raise ValueError("expected 2-D images")
    w0, w1 = min(window, a.shape[0]), min(window, a.shape[1])
    if data_range is None:
        data_range = max(a.max(), b.max()) - min(a.min(), b.min())
    if data_range <= 0:
        data_range = 1.0
    c1, c2 = (k1 * data_range) ** 2, (k2 * data_range) ** 2
    view = np.lib.stride_tricks.sliding_window_view
    pa, pb = view(a, (w0, w1)), view(b, (w0, w1))
    axes = (-2, -1)
    mu_a, mu_b = pa.mean(axis=axes), pb.mean(axis=axes)
    var_a = pa.var(axis=axes)
    var_b = pb.var(axis=axes)
    cov = (pa * pb).mean(axis=axes) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def regions_csv(region: ConfidenceRegion, beta_true=None) -> str:
    """CSV with columns ``coordinate,center_re,center_im,radius,hit``."""
    center = np.atleast_1d(np.asarray(region.center))
    radius = np.broadcast_to(np.asarray(region.radius, dtype=float), center.shape)
    hits = (np.broadcast_to(contains(region, beta_true), center.shape).astype(int)
            if beta_true is not None else np.full(center.shape, -1))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["coordinate", "center_re", "center_im", "radius", "hit"])
    for i in range(center.size):
        w.writerow([i, repr(float(np.real(center[i]))), repr(float(np.imag(center[i]))),
                    repr(float(radius[i])), int(hits[i])])
    return buf.getvalue()
