"""Closed-form rate-accuracy mathematics for equiprobable labels.

A discrete analysis task with K possible outcomes, all equally likely, has a
known minimum encoding rate for any target error level.  With the error
indicator as distortion, expected distortion D equals the error rate of the
reconstructed decision, and accuracy is A = 1 - D.  This module evaluates
that bound exactly, inverts it, and provides the large-K linear
approximations.  All rates are in bits per task instance; all logarithms are
base 2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Pmf",
    "RaPoint",
    "RaCurve",
    "RateSaturationWarning",
    "CURVE_KINDS",
    "binary_entropy",
    "closed_form_rate",
    "closed_form_curve",
    "accuracy_at_rate",
    "accuracy_slope_approx",
    "linear_rate_approx",
]

#: Probabilities must sum to one within this absolute tolerance.
PMF_SUM_TOL = 1e-12

#: Allowed curve provenance tags.
CURVE_KINDS = ("closed-form-uniform", "blahut-arimoto", "achievable")


class RateSaturationWarning(UserWarning):
    """Requested rate exceeds the label entropy; accuracy clamps to 1."""


@dataclass(frozen=True, eq=False)
class Pmf:
    """A finite probability distribution over task labels.

    Attributes:
        probs: 1-D float array of non-negative probabilities summing to 1.
        labels: optional display names, same length as ``probs``.
    """

    probs: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("probabilities must form a non-empty 1-D vector")
        if not np.all(np.isfinite(p)):
            raise ValueError("probabilities must be finite")
        if np.any(p < 0.0):
            raise ValueError("probabilities must be non-negative")
        if abs(float(p.sum()) - 1.0) > PMF_SUM_TOL:
            raise ValueError(
                f"probabilities sum to {p.sum()!r}, not 1 within {PMF_SUM_TOL}"
            )
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != p.size:
                raise ValueError("labels must match the number of probabilities")
            object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return int(self.probs.size)

    @classmethod
    def uniform(cls, num_classes: int, labels: tuple[str, ...] | None = None) -> "Pmf":
        """Equiprobable distribution over ``num_classes`` labels."""
        if num_classes < 1:
            raise ValueError("need at least one class")
        return cls(np.full(num_classes, 1.0 / num_classes), labels)

    @classmethod
    def from_weights(
        cls, weights, labels: tuple[str, ...] | None = None
    ) -> "Pmf":
        """Normalize non-negative weights into a distribution."""
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must form a non-empty 1-D vector")
        if np.any(w < 0.0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        total = float(w.sum())
        if total <= 0.0:
            raise ValueError("weights must have a positive sum")
        return cls(w / total, labels)

    def without_zeros(self) -> "Pmf":
        """Drop zero-probability labels, keeping order."""
        keep = self.probs > 0.0
        labels = None
        if self.labels is not None:
            labels = tuple(l for l, k in zip(self.labels, keep) if k)
        return Pmf(self.probs[keep], labels)


@dataclass(frozen=True)
class RaPoint:
    """One operating point: rate in bits per instance at a given error level.

    ``accuracy`` is derived, so the identity accuracy = 1 - distortion holds
    by construction.
    """

    rate: float
    distortion: float

    def __post_init__(self) -> None:
        r, d = float(self.rate), float(self.distortion)
        # absorb float noise from iterative solvers at the boundaries
        if -1e-9 <= r < 0.0:
            r = 0.0
        if -1e-12 <= d < 0.0:
            d = 0.0
        if r < 0.0:
            raise ValueError(f"rate must be non-negative, got {r}")
        if not 0.0 <= d <= 1.0:
            raise ValueError(f"distortion must lie in [0, 1], got {d}")
        object.__setattr__(self, "rate", r)
        object.__setattr__(self, "distortion", d)

    @property
    def accuracy(self) -> float:
        return 1.0 - self.distortion


@dataclass(frozen=True, eq=False)
class RaCurve:
    """An ordered rate-accuracy frontier.

    Points are sorted by strictly increasing distortion with non-increasing
    rate; ``source_kind`` records how the curve was produced.
    """

    points: tuple[RaPoint, ...]
    source_kind: str

    def __post_init__(self) -> None:
        if self.source_kind not in CURVE_KINDS:
            raise ValueError(
                f"source_kind must be one of {CURVE_KINDS}, got {self.source_kind!r}"
            )
        pts = tuple(self.points)
        if not pts:
            raise ValueError("a curve needs at least one point")
        d = np.array([p.distortion for p in pts])
        r = np.array([p.rate for p in pts])
        if np.any(np.diff(d) <= 0.0):
            raise ValueError("distortions must be strictly increasing")
        if np.any(np.diff(r) > 1e-9):
            raise ValueError("rate must be non-increasing in distortion")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def rates(self) -> np.ndarray:
        return np.array([p.rate for p in self.points])

    @property
    def distortions(self) -> np.ndarray:
        return np.array([p.distortion for p in self.points])

    @property
    def accuracies(self) -> np.ndarray:
        return np.array([p.accuracy for p in self.points])

    @classmethod
    def from_arrays(cls, rates, distortions, source_kind: str) -> "RaCurve":
        pts = tuple(RaPoint(float(r), float(d)) for r, d in zip(rates, distortions))
        return cls(pts, source_kind)


def binary_entropy(p: float) -> float:
    """Entropy in bits of a {p, 1-p} split, with 0*log2(0) taken as 0."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def _check_classes(num_classes: int) -> int:
    k = int(num_classes)
    if k != num_classes or k < 2:
        raise ValueError(
            "need an integer number of classes >= 2; a one-class task carries "
            "no information and is up to the caller"
        )
    return k


def closed_form_rate(num_classes: int, distortion: float) -> float:
    """Minimum bits per instance to decide among equiprobable classes.

    For K equiprobable labels under the error-indicator distortion, the rate
    at expected error D is ``log2(K) - D*log2(K-1) - h(D)`` on
    ``0 <= D <= 1 - 1/K`` (with h the binary entropy) and 0 beyond; the two
    branches meet continuously.
    """
    k = _check_classes(num_classes)
    d = float(distortion)
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"distortion must lie in [0, 1], got {d}")
    if d >= 1.0 - 1.0 / k:
        return 0.0
    rate = math.log2(k) - d * math.log2(k - 1) - binary_entropy(d)
    # cancellation just below the junction can leave ~1e-16 of negative noise
    return max(rate, 0.0)


def closed_form_curve(num_classes: int, grid_size: int) -> RaCurve:
    """Sample the equiprobable-label bound on an even distortion grid.

    The grid spans [0, 1 - 1/K] inclusive, so the entropy intercept at D = 0
    and the zero-rate endpoint are exact.
    """
    k = _check_classes(num_classes)
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    dmax = 1.0 - 1.0 / k
    ds = np.linspace(0.0, dmax, int(grid_size))
    return RaCurve.from_arrays(
        [closed_form_rate(k, d) for d in ds], ds, "closed-form-uniform"
    )


def accuracy_at_rate(num_classes: int, rate: float, *, tol: float = 1e-10) -> float:
    """Invert the equiprobable-label bound: best accuracy at a given rate.

    Solved by bisection on accuracy over [1/K, 1], where the bound is a
    monotone function of accuracy; bisection is robust to the unbounded
    slope of the entropy term near zero distortion.  Rates above log2(K)
    saturate at accuracy 1 with a `RateSaturationWarning` (published
    operating points routinely spend more than the label entropy).
    """
    k = _check_classes(num_classes)
    rate = float(rate)
    if rate < 0.0:
        raise ValueError(f"rate must be non-negative, got {rate}")
    max_rate = math.log2(k)
    if rate >= max_rate:
        if rate > max_rate:
            warnings.warn(
                f"rate {rate} exceeds log2({k}) = {max_rate}; accuracy saturates at 1",
                RateSaturationWarning,
                stacklevel=2,
            )
        return 1.0
    lo, hi = 1.0 / k, 1.0  # rate(lo) = 0 <= rate <= rate(hi) = log2 K
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if closed_form_rate(k, 1.0 - mid) < rate:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def accuracy_slope_approx(num_classes: int) -> float:
    """Large-K rule of thumb: accuracy gained per additional bit, 1/log2(K)."""
    k = _check_classes(num_classes)
    return 1.0 / math.log2(k)


def linear_rate_approx(num_classes: int, accuracy: float) -> float:
    """Large-K linearization of the bound: rate ~ A * log2(K).

    Drops the binary-entropy term and replaces log2(K-1) by log2(K), so it
    overshoots the exact bound at intermediate accuracies.
    """
    k = _check_classes(num_classes)
    a = float(accuracy)
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"accuracy must lie in [0, 1], got {a}")
    return a * math.log2(k)
