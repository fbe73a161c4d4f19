"""
Symmetry axis estimation from per-row edge centroids.

Each image row that contains edge pixels contributes one centroid, the mean
column of its edge pixels. A vertical line ``x = k`` is the constant
least-squares fit of those centroids; a bent midline is modelled as a
polynomial ``x = g(y)`` in the row index.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySeries, InsufficientPoints, InvalidParams, SingularSystem
from .image_core import BinaryMask, round_half_up

__all__ = [
    "AxisKind",
    "Classification",
    "CentroidSeries",
    "SymmetryAxis",
    "SymmetryVerdict",
    "edge_centroids",
    "fit_straight_axis",
    "fit_curve_axis",
    "evaluate_axis",
    "classify_axis",
    "axis_trace",
    "DEFAULT_DEGREE",
    "DEFAULT_TAU_RMS",
    "DEFAULT_TAU_IMPROVE",
    "MAX_DEGREE",
]

DEFAULT_DEGREE = 2
MAX_DEGREE = 6
DEFAULT_TAU_RMS = 2.0
DEFAULT_TAU_IMPROVE = 0.30


class AxisKind(str, enum.Enum):
    STRAIGHT = "Straight"
    CURVED = "Curved"


class Classification(str, enum.Enum):
    SYMMETRIC = "Symmetric"
    DISTORTED = "Distorted"


@dataclass(frozen=True, eq=False)
class CentroidSeries:
    rows: np.ndarray       # int, strictly increasing
    centroids: np.ndarray  # float, mean edge column per row
    counts: np.ndarray     # int, edge pixels per row (>= 1)
    width: int | None = None

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        cents = np.asarray(self.centroids, dtype=np.float64)
        counts = np.asarray(self.counts, dtype=np.int64)
        if not (rows.shape == cents.shape == counts.shape) or rows.ndim != 1:
            raise ValueError("rows, centroids and counts must be 1-D and equally long")
        if rows.size > 1 and np.any(np.diff(rows) <= 0):
            raise ValueError("rows must be strictly increasing")
        if np.any(counts < 1):
            raise ValueError("every row needs at least one edge pixel")
        for name, arr in (("rows", rows), ("centroids", cents), ("counts", counts)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_centroids(cls, centroids, rows=None):
        """Series with unit counts; rows default to 0..n-1."""
        cents = np.asarray(centroids, dtype=np.float64)
        rows = np.arange(cents.size) if rows is None else rows
        return cls(rows, cents, np.ones(cents.size, dtype=np.int64))

    def __len__(self):
        return int(self.rows.size)

    def entries(self):
        return list(zip(self.rows.tolist(), self.centroids.tolist(), self.counts.tolist()))


@dataclass(frozen=True)
class SymmetryAxis:
    kind: AxisKind
    coeffs: tuple[float, ...]   # x = sum(c[d] * y**d); a single entry for a straight axis
    rms_straight: float
    rms_curved: float

    @property
    def straight_k(self) -> float | None:
        return self.coeffs[0] if self.kind is AxisKind.STRAIGHT else None

    @classmethod
    def straight(cls, k, rms_straight=0.0, rms_curved=None):
        return cls(AxisKind.STRAIGHT, (float(k),), float(rms_straight),
                   float(rms_straight if rms_curved is None else rms_curved))

    @classmethod
    def curved(cls, coeffs, rms_straight=0.0, rms_curved=0.0):
        coeffs = tuple(float(c) for c in coeffs)
        if len(coeffs) < 2:
            raise ValueError("a curved axis needs degree >= 1")
        return cls(AxisKind.CURVED, coeffs, float(rms_straight), float(rms_curved))

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "coeffs": list(self.coeffs),
            "rms_straight": self.rms_straight,
            "rms_curved": self.rms_curved,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(AxisKind(d["kind"]), tuple(float(c) for c in d["coeffs"]),
                   float(d["rms_straight"]), float(d["rms_curved"]))


@dataclass(frozen=True)
class SymmetryVerdict:
    classification: Classification
    straight_rms: float
    improvement_ratio: float
    axis: SymmetryAxis = field(compare=False)

    @property
    def is_symmetric(self) -> bool:
        return self.classification is Classification.SYMMETRIC


def edge_centroids(em: BinaryMask) -> CentroidSeries:
    """Mean edge column of every row that has at least one edge pixel."""
    bits = em.bits
    counts = bits.sum(axis=1)
    rows = np.flatnonzero(counts)
    xs = np.arange(bits.shape[1], dtype=np.int64)
    # integer sums keep the mean exact up to one final division
    sums = (bits[rows] * xs).sum(axis=1)
    return CentroidSeries(rows, sums / counts[rows], counts[rows], width=em.width)


def fit_straight_axis(cs: CentroidSeries):
    """Return ``(k, rms)`` for the best vertical line ``x = k``."""
    if len(cs) == 0:
        raise EmptySeries("cannot fit an axis to an empty centroid series")
    g = cs.centroids
    k = float(g.mean())
    rms = float(np.sqrt(np.mean((g - k) ** 2)))
    return k, rms


def _unscale(scaled, mid, half):
    """Coefficients of ``p((y - mid) / half)`` expressed in powers of ``y``."""
    deg = len(scaled) - 1
    alpha, beta = 1.0 / half, -mid / half
    out = np.zeros(deg + 1)
    for j, a in enumerate(scaled):
        # (alpha*y + beta)**j expanded binomially
        for i in range(j + 1):
            out[i] += a * math.comb(j, i) * alpha ** i * beta ** (j - i)
    return out


def fit_curve_axis(cs: CentroidSeries, degree: int = DEFAULT_DEGREE):
    """Least-squares polynomial ``x = g(y)`` through the centroids.

    Rows are mapped onto [-1, 1] before solving; the returned coefficients
    are in raw row units, lowest power first. Returns ``(coeffs, rms)``.
    """
    if int(degree) != degree or degree < 1:
        raise InsufficientPoints(f"curve degree must be >= 1, got {degree}")
    n = len(cs)
    if n < degree + 1:
        raise InsufficientPoints(f"degree {degree} needs {degree + 1} rows, got {n}")
    y = cs.rows.astype(np.float64)
    g = cs.centroids
    lo, hi = y.min(), y.max()
    mid, half = (lo + hi) / 2.0, (hi - lo) / 2.0
    if half == 0:
        raise SingularSystem("all rows identical")
    t = (y - mid) / half
    vander = np.vander(t, degree + 1, increasing=True)
    q, r = np.linalg.qr(vander)
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-12 * diag.max():
        raise SingularSystem("design matrix is rank deficient")
    scaled = np.linalg.solve(r, q.T @ g)
    resid = g - vander @ scaled
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return tuple(float(c) for c in _unscale(scaled, mid, half)), rms


def evaluate_axis(axis: SymmetryAxis, row):
    """Column of the axis at ``row`` (scalar or array)."""
    if axis.kind is AxisKind.STRAIGHT:
        k = axis.coeffs[0]
        return k if np.isscalar(row) else np.full(np.shape(row), k, dtype=np.float64)
    y = row if np.isscalar(row) else np.asarray(row, dtype=np.float64)
    acc = 0.0
    for c in reversed(axis.coeffs):
        acc = acc * y + c
    return float(acc) if np.isscalar(row) else acc


def classify_axis(cs: CentroidSeries, degree: int = DEFAULT_DEGREE,
                  tau_rms: float = DEFAULT_TAU_RMS,
                  tau_improve: float = DEFAULT_TAU_IMPROVE) -> SymmetryVerdict:
    """Symmetric when a vertical line explains the centroids and a curve buys little."""
    if not tau_rms >= 0:
        raise InvalidParams(f"tau_rms must be >= 0, got {tau_rms}")
    if not 0 <= tau_improve <= 1:
        raise InvalidParams(f"tau_improve must lie in [0, 1], got {tau_improve}")
    k, rms_s = fit_straight_axis(cs)
    coeffs, rms_c = fit_curve_axis(cs, degree)
    improve = 0.0 if rms_s == 0 else min(1.0, max(0.0, (rms_s - rms_c) / rms_s))
    if rms_s <= tau_rms and improve < tau_improve:
        cls = Classification.SYMMETRIC
        axis = SymmetryAxis.straight(k, rms_s, rms_c)
    else:
        cls = Classification.DISTORTED
        axis = SymmetryAxis.curved(coeffs, rms_s, rms_c)
    return SymmetryVerdict(cls, rms_s, improve, axis)


def axis_trace(axis: SymmetryAxis, width: int, height: int, rows=None) -> BinaryMask:
    """Rasterize the axis, one pixel per row, over ``rows`` (default: all)."""
    bits = np.zeros((height, width), dtype=bool)
    ys = np.arange(height) if rows is None else np.asarray(rows, dtype=np.int64)
    if ys.size:
        xs = round_half_up(evaluate_axis(axis, ys)).astype(np.int64)
        ok = (xs >= 0) & (xs < width) & (ys >= 0) & (ys < height)
        bits[ys[ok], xs[ok]] = True
    return BinaryMask(bits)
