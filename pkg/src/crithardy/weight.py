"""Singular Hardy weight and the shifted-frame cusp calibration functions.

The weight ``W_R(x) = (|x| log(R/|x|))^{-N}`` blows up at the origin and on the
sphere ``|x| = R``.  Near the sphere it behaves like the inverse distance to the
boundary raised to ``N``; `boundary_taylor_gap` measures the relative deviation.

The ``cusp_*`` functions work in the polar frame shifted to the boundary point
``(0, 1)`` of the unit disk: a point at distance ``r`` from that point in
direction ``theta`` (measured from the positive horizontal axis, so the disk
interior is ``theta in (0, pi)``) sits at squared distance ``h(r, theta)`` from
the origin.  ``cusp_weight_ratio`` compares the weight normalizer against the
squared height above the boundary, and ``cusp_ratio_infimum`` minimizes it over
a cone slice; both are the calibration inputs for the narrowing-cusp domain on
which the best constant exceeds 1/4 without being attained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._errors import DomainRangeError, NumericalError

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class WeightParams:
    """Parameters of the critical Hardy weight: outer radius R and exponent N."""

    R: float
    N: int = 2

    def __post_init__(self) -> None:
        if not (self.R > 0):
            raise DomainRangeError(f"R must be positive, got {self.R}")
        if self.N < 2:
            raise DomainRangeError(f"N must be an integer >= 2, got {self.N}")


def log_R_over(p: WeightParams, x_norm: float) -> float:
    """log(R/|x|) evaluated stably near |x| = R via log1p."""
    return -math.log1p((x_norm - p.R) / p.R)


def weight_eval(p: WeightParams, x_norm) -> float:
    """Evaluate W_R at radius ``x_norm`` in (0, R).

    Accepts a scalar or ndarray; singular at both endpoints, hence the open
    range check.
    """
    x = np.asarray(x_norm, dtype=float)
    if np.any(x <= 0.0) or np.any(x >= p.R):
        raise DomainRangeError(f"|x| must lie in (0, {p.R}); got {x_norm}")
    log_term = -np.log1p((x - p.R) / p.R)
    w = (x * log_term) ** (-p.N)
    if np.ndim(x_norm) == 0:
        return float(w)
    return w


def boundary_taylor_gap(p: WeightParams, x_norm) -> float:
    """Relative gap |x|^N log(R/|x|)^N / (R-|x|)^N - 1; tends to 0 as |x| -> R."""
    x = np.asarray(x_norm, dtype=float)
    if np.any(x <= 0.0) or np.any(x >= p.R):
        raise DomainRangeError(f"|x| must lie in (0, {p.R}); got {x_norm}")
    log_term = -np.log1p((x - p.R) / p.R)
    gap = (x * log_term / (p.R - x)) ** p.N - 1.0
    if np.ndim(x_norm) == 0:
        return float(gap)
    return gap


def cusp_h(r, theta):
    """Squared distance to the shifted origin: h(r, theta) = r^2 - 2 r sin(theta) + 1."""
    r_arr = np.asarray(r, dtype=float)
    th = np.asarray(theta, dtype=float)
    if np.any(r_arr <= 0.0) or np.any(r_arr >= 1.0):
        raise DomainRangeError("r must lie in (0, 1)")
    if np.any(th <= 0.0) or np.any(th >= math.pi):
        raise DomainRangeError("theta must lie in (0, pi)")
    out = r_arr * r_arr - 2.0 * r_arr * np.sin(th) + 1.0
    if np.ndim(r) == 0 and np.ndim(theta) == 0:
        return float(out)
    return out


def cusp_weight_ratio(r, theta):
    """Ratio of the shifted weight normalizer to the squared height above the boundary.

    With y = (r cos(theta), r sin(theta)) in the shifted frame, the normalizer is
    (1/4) h (log h)^2 and the height is y_2 = r sin(theta); the ratio tends to 1
    as the tip is approached.  Evaluated via log1p in the small-r regime where
    h is close to 1.
    """
    r_arr = np.asarray(r, dtype=float)
    th = np.asarray(theta, dtype=float)
    if np.any(r_arr <= 0.0) or np.any(r_arr >= 1.0):
        raise DomainRangeError("r must lie in (0, 1)")
    if np.any(th <= 0.0) or np.any(th >= math.pi):
        raise DomainRangeError("theta must lie in (0, pi)")
    w = r_arr * r_arr - 2.0 * r_arr * np.sin(th)  # h - 1, small near the tip
    log_h = np.log1p(w)
    y2 = r_arr * np.sin(th)
    out = 0.25 * (1.0 + w) * log_h * log_h / (y2 * y2)
    if np.ndim(r) == 0 and np.ndim(theta) == 0:
        return float(out)
    return out


def cusp_ratio_infimum(r: float, a: float, samples: int = 2048,
                       refine_tol: float = 1e-12) -> float:
    """Minimum of `cusp_weight_ratio` over the cone slice theta in [a, pi - a].

    Dense sampling followed by golden-section refinement of the best bracket;
    the slice is symmetric about pi/2 so the scan covers [a, pi/2].
    """
    if not (0.0 < r < 1.0):
        raise DomainRangeError(f"r must lie in (0, 1), got {r}")
    if not (0.0 < a < math.pi / 2):
        raise DomainRangeError(f"a must lie in (0, pi/2), got {a}")
    thetas = np.linspace(a, math.pi / 2, samples)
    vals = cusp_weight_ratio(r, thetas)
    if not np.all(np.isfinite(vals)):
        raise NumericalError(f"non-finite ratio values at r={r}")
    k = int(np.argmin(vals))
    lo = thetas[max(k - 1, 0)]
    hi = thetas[min(k + 1, samples - 1)]
    # Golden-section refinement of the sampled bracket.
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1 = cusp_weight_ratio(r, x1)
    f2 = cusp_weight_ratio(r, x2)
    while hi - lo > refine_tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = cusp_weight_ratio(r, x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = cusp_weight_ratio(r, x2)
    best = min(float(vals[k]), f1, f2)
    if not math.isfinite(best):
        raise NumericalError(f"cusp ratio minimization failed at r={r}")
    return best


def cusp_flat_radius(a: float, scan_step: float = 1e-3, cap: float = 0.5,
                     samples: int = 512) -> float:
    """Largest scanned radius <= cap below which the slice infimum stays < 1.

    Scans r = scan_step, 2*scan_step, ... and returns the last grid value before
    the first violation of ``inf < 1`` (the cap if none occurs).
    """
    r = scan_step
    last_good = 0.0
    while r <= cap + 1e-15:
        if cusp_ratio_infimum(r, a, samples=samples) >= 1.0:
            break
        last_good = r
        r += scan_step
    if last_good == 0.0:
        raise NumericalError(f"slice ratio is not < 1 near 0 for a={a}")
    return min(last_good, cap)
