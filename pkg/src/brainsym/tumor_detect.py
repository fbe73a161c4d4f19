"""
Tumor localization by mirroring the slice about its symmetry axis.

The image is reflected about the fitted axis, the absolute difference with
the original is thresholded inside the brain mask, and the surviving
connected components are reported with their area and share of the brain.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import edge_detect, symmetry
from .errors import (
    BrainSymError,
    DimensionMismatch,
    EmptyForeground,
    InvalidParams,
    PipelineError,
)
from .image_core import BinaryMask, GrayImage, round_half_up, write_ppm_overlay
from .symmetry import SymmetryAxis, SymmetryVerdict, evaluate_axis

__all__ = [
    "Side",
    "BrainMask",
    "Region",
    "RegionReport",
    "PipelineConfig",
    "PipelineResult",
    "otsu_threshold",
    "label_components",
    "brain_mask",
    "reflect_about_axis",
    "asymmetry_map",
    "detect_regions",
    "run_pipeline",
]

DEFAULT_DIFF_THRESHOLD = 30
DEFAULT_MIN_AREA = 50

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


class Side(str, enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"


@dataclass(frozen=True, eq=False)
class BrainMask:
    mask: BinaryMask

    @property
    def area(self) -> int:
        return self.mask.count()

    @property
    def bits(self) -> np.ndarray:
        return self.mask.bits

    @property
    def shape(self):
        return self.mask.shape


@dataclass(frozen=True, eq=False)
class Region:
    pixels: np.ndarray          # (n, 2) array of (x, y), row-major order
    side: Side
    mean_intensity: float

    @property
    def area(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def centroid(self) -> tuple[float, float]:
        return float(self.pixels[:, 0].mean()), float(self.pixels[:, 1].mean())

    def to_dict(self):
        cx, cy = self.centroid
        return {
            "area": self.area,
            "centroid": [cx, cy],
            "side": self.side.value,
            "mean_intensity": self.mean_intensity,
        }


@dataclass(frozen=True, eq=False)
class RegionReport:
    regions: tuple[Region, ...]
    brain_area: int

    @property
    def total_tumor_area(self) -> int:
        return sum(r.area for r in self.regions)

    @property
    def damage_percent(self) -> float:
        if self.brain_area == 0:
            return 0.0
        return 100.0 * self.total_tumor_area / self.brain_area

    def mask(self, width: int, height: int) -> BinaryMask:
        bits = np.zeros((height, width), dtype=bool)
        for r in self.regions:
            bits[r.pixels[:, 1], r.pixels[:, 0]] = True
        return BinaryMask(bits)

    def to_dict(self):
        return {
            "brain_area": self.brain_area,
            "regions": [r.to_dict() for r in self.regions],
            "total_tumor_area": self.total_tumor_area,
            "damage_percent": self.damage_percent,
        }


# ---------------------------------------------------------------------------
# Brain mask
# ---------------------------------------------------------------------------

def otsu_threshold(pixels: np.ndarray) -> int:
    """Intensity ``t`` maximizing between-class variance of ``<= t`` vs ``> t``."""
    hist = np.bincount(np.asarray(pixels, dtype=np.int64).ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    levels = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(hist)
    w1 = total - w0
    s0 = np.cumsum(hist * levels)
    s1 = s0[-1] - s0
    with np.errstate(divide="ignore", invalid="ignore"):
        between = w0 * w1 * (s0 / w0 - s1 / w1) ** 2
    between[(w0 == 0) | (w1 == 0)] = -1.0
    return int(np.argmax(between))


def label_components(bits: np.ndarray, connectivity: int = 8):
    """Connected-component labels (0 = background) and component count."""
    structure = EIGHT_CONNECTED if connectivity == 8 else None
    labels, n = ndimage.label(bits, structure=structure)
    return labels, int(n)


def brain_mask(img: GrayImage) -> BrainMask:
    """Largest bright 8-connected blob above the Otsu level, holes filled."""
    t = otsu_threshold(img.pixels)
    fg = img.pixels > t
    if not fg.any():
        raise EmptyForeground(f"no pixel above the Otsu threshold {t}")
    labels, _ = label_components(fg)
    sizes = np.bincount(labels.ravel())
    sizes[0] = 0
    largest = labels == int(np.argmax(sizes))
    # background pieces not reaching the border are holes (4-connected dual)
    filled = ndimage.binary_fill_holes(largest)
    return BrainMask(BinaryMask(filled))


# ---------------------------------------------------------------------------
# Reflection and asymmetry
# ---------------------------------------------------------------------------

def _mirror_columns(axis: SymmetryAxis, width: int, height: int) -> np.ndarray:
    """Source column of the mirror of every pixel; -1 where it falls outside."""
    g = evaluate_axis(axis, np.arange(height, dtype=np.float64))
    xs = np.arange(width, dtype=np.float64)
    src = round_half_up(2.0 * np.asarray(g)[:, None] - xs[None, :])
    src = np.where((src >= 0) & (src < width), src, -1)
    return src.astype(np.int64)


def _reflect_array(arr: np.ndarray, axis: SymmetryAxis, fill=0) -> np.ndarray:
    h, w = arr.shape
    src = _mirror_columns(axis, w, h)
    rows = np.broadcast_to(np.arange(h)[:, None], (h, w))
    out = arr[rows, np.clip(src, 0, None)].copy()
    out[src < 0] = fill
    return out


def reflect_about_axis(img: GrayImage, axis: SymmetryAxis) -> GrayImage:
    return GrayImage(_reflect_array(img.pixels, axis))


def _mirror_side(axis: SymmetryAxis, width: int, height: int) -> np.ndarray:
    """-1 left of the axis, +1 right of it, 0 exactly on it."""
    g = np.asarray(evaluate_axis(axis, np.arange(height, dtype=np.float64)))
    return np.sign(np.arange(width)[None, :] - g[:, None]).astype(np.int64)


def asymmetry_map(img: GrayImage, axis: SymmetryAxis, mask: BrainMask) -> GrayImage:
    """``|I - I_mirror|`` where a pixel and its mirror both lie in the brain."""
    if mask.shape != img.shape:
        raise DimensionMismatch(f"mask {mask.shape} vs image {img.shape}")
    a = img.pixels.astype(np.int16)
    mirrored = _reflect_array(a, axis)
    both = mask.bits & _reflect_array(mask.bits, axis, fill=False)
    diff = np.where(both, np.abs(a - mirrored), 0)
    return GrayImage(diff.astype(np.uint8))


# ---------------------------------------------------------------------------
# Region extraction
# ---------------------------------------------------------------------------

def _components_by_side(binary, side_map, min_area):
    """Label each half separately so no component straddles the axis."""
    comps = []
    for side_value, side in ((-1, Side.LEFT), (1, Side.RIGHT)):
        labels, n = label_components(binary & (side_map == side_value))
        if n == 0:
            continue
        ys, xs = np.nonzero(labels)
        ids = labels[ys, xs]
        order = np.argsort(ids, kind="stable")
        ys, xs, ids = ys[order], xs[order], ids[order]
        bounds = np.searchsorted(ids, np.arange(1, n + 2))
        for i in range(n):
            lo, hi = bounds[i], bounds[i + 1]
            if hi - lo >= min_area:
                comps.append((side, np.column_stack([xs[lo:hi], ys[lo:hi]])))
    return comps


def _select_sides(comps, src_cols, img, brain_mean):
    """Resolve mirror pairs, keeping the member that deviates more from the brain mean."""
    h, w = img.shape
    owner = np.full((h, w), -1, dtype=np.int64)
    for i, (_, px) in enumerate(comps):
        owner[px[:, 1], px[:, 0]] = i
    means = [float(img.pixels[px[:, 1], px[:, 0]].mean()) for _, px in comps]
    keep = [True] * len(comps)
    paired = [False] * len(comps)
    # larger components claim partners first; ties broken by position in the list
    order = sorted(range(len(comps)), key=lambda i: (-comps[i][1].shape[0], i))
    for i in order:
        if paired[i]:
            continue
        side, px = comps[i]
        mx = src_cols[px[:, 1], px[:, 0]]
        ok = mx >= 0
        hits = owner[px[ok, 1], mx[ok]]
        hits = hits[(hits >= 0) & (hits != i)]
        hits = [j for j in hits.tolist() if not paired[j] and comps[j][0] is not side]
        if not hits:
            continue
        j = max(set(hits), key=lambda c: (hits.count(c), -c))
        paired[i] = paired[j] = True
        dev_i, dev_j = abs(means[i] - brain_mean), abs(means[j] - brain_mean)
        if dev_i == dev_j:
            loser = j if side is Side.LEFT else i
        else:
            loser = j if dev_i > dev_j else i
        keep[loser] = False
    return [Region(px, side, means[i]) for i, (side, px) in enumerate(comps) if keep[i]]


def detect_regions(amap: GrayImage, img: GrayImage, axis: SymmetryAxis, mask: BrainMask,
                   diff_threshold: int = DEFAULT_DIFF_THRESHOLD,
                   min_area: int = DEFAULT_MIN_AREA) -> RegionReport:
    if not (amap.shape == img.shape == mask.shape):
        raise DimensionMismatch(f"shapes {amap.shape}, {img.shape}, {mask.shape} differ")
    if not 1 <= diff_threshold <= 255:
        raise InvalidParams(f"diff_threshold must lie in [1, 255], got {diff_threshold}")
    if min_area < 1:
        raise InvalidParams(f"min_area must be >= 1, got {min_area}")
    h, w = img.shape
    binary = (amap.pixels >= diff_threshold) & mask.bits
    binary = ndimage.binary_opening(binary, structure=EIGHT_CONNECTED)
    comps = _components_by_side(binary, _mirror_side(axis, w, h), min_area)
    brain_mean = float(img.pixels[mask.bits].mean()) if mask.area else 0.0
    regions = _select_sides(comps, _mirror_columns(axis, w, h), img, brain_mean)
    regions.sort(key=lambda r: (int(r.pixels[0, 1]), int(r.pixels[0, 0])))
    return RegionReport(tuple(regions), mask.area)


# ---------------------------------------------------------------------------
# End-to-end pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PipelineConfig:
    canny: edge_detect.CannyParams = field(default_factory=edge_detect.CannyParams)
    degree: int = symmetry.DEFAULT_DEGREE
    tau_rms: float = symmetry.DEFAULT_TAU_RMS
    tau_improve: float = symmetry.DEFAULT_TAU_IMPROVE
    diff_threshold: int = DEFAULT_DIFF_THRESHOLD
    min_area: int = DEFAULT_MIN_AREA

    def __post_init__(self):
        if not 1 <= self.degree <= symmetry.MAX_DEGREE:
            raise InvalidParams(f"degree must lie in [1, {symmetry.MAX_DEGREE}], got {self.degree}")
        if not self.tau_rms >= 0:
            raise InvalidParams(f"tau_rms must be >= 0, got {self.tau_rms}")
        if not 0 <= self.tau_improve <= 1:
            raise InvalidParams(f"tau_improve must lie in [0, 1], got {self.tau_improve}")
        if not 1 <= self.diff_threshold <= 255:
            raise InvalidParams(f"diff_threshold must lie in [1, 255], got {self.diff_threshold}")
        if self.min_area < 1:
            raise InvalidParams(f"min_area must be >= 1, got {self.min_area}")

    def to_dict(self):
        return {
            "operator": "canny",
            "sigma": self.canny.sigma,
            "low": self.canny.low_ratio,
            "high": self.canny.high_ratio,
            "degree": self.degree,
            "tau_rms": self.tau_rms,
            "tau_improve": self.tau_improve,
            "diff_threshold": self.diff_threshold,
            "min_area": self.min_area,
        }


@dataclass(frozen=True, eq=False)
class PipelineResult:
    verdict: SymmetryVerdict
    report: RegionReport
    edges: edge_detect.EdgeMap
    axis_trace: BinaryMask
    asymmetry: GrayImage
    overlay: bytes

    @property
    def axis(self) -> SymmetryAxis:
        return self.verdict.axis

    def to_dict(self, params=None):
        axis = self.axis.to_dict()
        axis["improvement_ratio"] = self.verdict.improvement_ratio
        out = {"verdict": self.verdict.classification.value, "axis": axis}
        out.update(self.report.to_dict())
        out["params"] = dict(params) if params is not None else {}
        return out


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except BrainSymError as exc:
        raise PipelineError(name, exc) from exc


def run_pipeline(img: GrayImage, config: PipelineConfig | None = None) -> PipelineResult:
    """Edges, centroids, axis verdict and, for distorted slices, tumor regions."""
    config = config or PipelineConfig()
    edges = _stage("edges", edge_detect.canny, img, config.canny)
    cs = _stage("centroids", symmetry.edge_centroids, edges)
    verdict = _stage("axis", symmetry.classify_axis, cs, config.degree,
                     config.tau_rms, config.tau_improve)
    mask = _stage("brain_mask", brain_mask, img)
    rows = np.arange(cs.rows[0], cs.rows[-1] + 1)
    trace = symmetry.axis_trace(verdict.axis, img.width, img.height, rows)
    if verdict.is_symmetric:
        amap = GrayImage(np.zeros(img.shape, dtype=np.uint8))
        report = RegionReport((), mask.area)
    else:
        amap = _stage("asymmetry", asymmetry_map, img, verdict.axis, mask)
        report = _stage("regions", detect_regions, amap, img, verdict.axis, mask,
                        config.diff_threshold, config.min_area)
    overlay = write_ppm_overlay(img, report.mask(img.width, img.height), trace)
    return PipelineResult(verdict, report, edges, trace, amap, overlay)
