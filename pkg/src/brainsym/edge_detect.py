"""
Edge maps from the Roberts cross, Prewitt and Canny operators.

All operators use the L2 gradient magnitude and a threshold expressed as a
fraction of the largest magnitude in the image. Pixels where the gradient
kernel does not fit inside the image are never edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ImageTooSmall, InvalidParams, InvalidThreshold
from .image_core import BinaryMask, GrayImage

__all__ = [
    "EdgeMap",
    "CannyParams",
    "GradientField",
    "DEFAULT_THRESHOLD",
    "roberts_gradient",
    "prewitt_gradient",
    "sobel_gradient",
    "gaussian_kernel",
    "gaussian_smooth",
    "non_maximum_suppression",
    "hysteresis",
    "roberts",
    "prewitt",
    "canny",
    "count_edges",
    "OPERATORS",
]

DEFAULT_THRESHOLD = 0.20

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)

# gradient magnitudes below this are floating-point residue of the blur
MAGNITUDE_FLOOR = 1e-6
TIE_TOLERANCE = 1e-9


class EdgeMap(BinaryMask):
    """Binary edge raster; its true pixels are the edge point set."""


@dataclass(frozen=True)
class CannyParams:
    sigma: float = 1.4
    low_ratio: float = 0.10
    high_ratio: float = 0.20

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidParams(f"sigma must be > 0, got {self.sigma}")
        if not (0 < self.low_ratio < self.high_ratio <= 1):
            raise InvalidParams(
                f"need 0 < low_ratio < high_ratio <= 1, got {self.low_ratio}, {self.high_ratio}")

    @property
    def kernel_size(self) -> int:
        return 2 * math.ceil(3 * self.sigma) + 1


@dataclass(frozen=True, eq=False)
class GradientField:
    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray

    @classmethod
    def from_components(cls, gx, gy):
        return cls(gx, gy, np.hypot(gx, gy))

    @property
    def width(self) -> int:
        return self.gx.shape[1]

    @property
    def height(self) -> int:
        return self.gx.shape[0]


def _check_threshold(threshold):
    if not (isinstance(threshold, (int, float)) and 0 < threshold <= 1):
        raise InvalidThreshold(f"threshold must lie in (0, 1], got {threshold!r}")


def _check_size(shape, minimum, name):
    h, w = shape
    if w < minimum or h < minimum:
        raise ImageTooSmall(f"{name} needs at least {minimum}x{minimum} pixels, got {w}x{h}")


def roberts_gradient(arr) -> GradientField:
    """Roberts cross; defined for x < width-1, y < height-1, zero elsewhere."""
    a = np.asarray(arr, dtype=np.float64)
    gx = np.zeros_like(a)
    gy = np.zeros_like(a)
    gx[:-1, :-1] = a[:-1, :-1] - a[1:, 1:]
    gy[:-1, :-1] = a[:-1, 1:] - a[1:, :-1]
    return GradientField.from_components(gx, gy)


def _three_by_three(a, centre_weight):
    # gx: right column minus left column, rows weighted (1, c, 1); gy likewise transposed
    gx = np.zeros_like(a)
    gy = np.zeros_like(a)
    dx = a[:, 2:] - a[:, :-2]
    dy = a[2:, :] - a[:-2, :]
    gx[1:-1, 1:-1] = dx[:-2] + centre_weight * dx[1:-1] + dx[2:]
    gy[1:-1, 1:-1] = dy[:, :-2] + centre_weight * dy[:, 1:-1] + dy[:, 2:]
    return GradientField.from_components(gx, gy)


def prewitt_gradient(arr) -> GradientField:
    return _three_by_three(np.asarray(arr, dtype=np.float64), 1.0)


def sobel_gradient(arr) -> GradientField:
    return _three_by_three(np.asarray(arr, dtype=np.float64), 2.0)


def _threshold_magnitude(mag: np.ndarray, fraction: float) -> np.ndarray:
    peak = mag.max()
    if peak <= 0:
        return np.zeros(mag.shape, dtype=bool)
    return mag >= fraction * peak


def roberts(img: GrayImage, threshold: float = DEFAULT_THRESHOLD) -> EdgeMap:
    _check_threshold(threshold)
    _check_size(img.shape, 2, "roberts")
    grad = roberts_gradient(img.pixels)
    return EdgeMap(_threshold_magnitude(grad.magnitude, threshold))


def prewitt(img: GrayImage, threshold: float = DEFAULT_THRESHOLD) -> EdgeMap:
    _check_threshold(threshold)
    _check_size(img.shape, 3, "prewitt")
    grad = prewitt_gradient(img.pixels)
    return EdgeMap(_threshold_magnitude(grad.magnitude, threshold))


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian of length ``2*ceil(3*sigma) + 1``."""
    radius = math.ceil(3 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_smooth(arr, sigma: float) -> np.ndarray:
    """Separable Gaussian blur without padding.

    Near the border only in-image samples contribute and the weights are
    renormalized, so constant regions stay constant.
    """
    a = np.asarray(arr, dtype=np.float64)
    k = gaussian_kernel(sigma)
    ones = np.ones_like(a)
    out = a
    norm = ones
    for axis in (0, 1):
        out = ndimage.correlate1d(out, k, axis=axis, mode="constant", cval=0.0)
        norm = ndimage.correlate1d(norm, k, axis=axis, mode="constant", cval=0.0)
    return out / norm


# neighbour offset (dy, dx) pointing along the gradient, per 45-degree octant
_OCTANT_OFFSETS = ((0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1))


def quantize_direction(gx, gy) -> np.ndarray:
    """Nearest of the bins 0, 45, 90, 135 degrees, returned as 0..3."""
    return _octant(gx, gy) % 4


def _octant(gx, gy):
    angle = np.degrees(np.arctan2(gy, gx)) % 360.0
    return (np.floor(angle / 45.0 + 0.5).astype(np.int64)) % 8


def _shifted(mag, dy, dx):
    """``out[y, x] = mag[y + dy, x + dx]``, zero outside the image."""
    h, w = mag.shape
    out = np.zeros_like(mag)
    ys = slice(max(0, -dy), min(h, h - dy))
    xs = slice(max(0, -dx), min(w, w - dx))
    ys_src = slice(max(0, dy), min(h, h + dy))
    xs_src = slice(max(0, dx), min(w, w + dx))
    out[ys, xs] = mag[ys_src, xs_src]
    return out


def non_maximum_suppression(grad: GradientField) -> np.ndarray:
    """Keep pixels that are maxima along their quantized gradient direction.

    The neighbour the gradient points towards may tie, the one behind must
    be strictly smaller, so a two-pixel plateau keeps exactly one pixel.
    Using the signed direction makes the choice mirror-consistent.
    """
    mag = grad.magnitude
    # differences this small are rounding noise and count as ties
    tol = TIE_TOLERANCE * mag.max()
    octant = _octant(grad.gx, grad.gy)
    keep = np.zeros(mag.shape, dtype=bool)
    for o, (dy, dx) in enumerate(_OCTANT_OFFSETS):
        ahead = _shifted(mag, dy, dx)
        behind = _shifted(mag, -dy, -dx)
        keep |= (octant == o) & (mag >= ahead - tol) & (mag > behind + tol)
    return keep & (mag > 0)


def hysteresis(strong: np.ndarray, weak: np.ndarray) -> np.ndarray:
    """Weak pixels survive when 8-connected, transitively, to a strong one."""
    candidates = strong | weak
    labels, n = ndimage.label(candidates, structure=EIGHT_CONNECTED)
    if n == 0:
        return np.zeros(strong.shape, dtype=bool)
    seeded = np.zeros(n + 1, dtype=bool)
    seeded[np.unique(labels[strong])] = True
    seeded[0] = False
    return seeded[labels]


def canny(img: GrayImage, params: CannyParams | None = None) -> EdgeMap:
    params = params or CannyParams()
    _check_size(img.shape, params.kernel_size, "canny")
    smooth = gaussian_smooth(img.pixels, params.sigma)
    grad = sobel_gradient(smooth)
    flat = grad.magnitude < MAGNITUDE_FLOOR
    grad = GradientField.from_components(np.where(flat, 0.0, grad.gx), np.where(flat, 0.0, grad.gy))
    thin = non_maximum_suppression(grad)
    peak = grad.magnitude.max()
    if peak <= 0:
        return EdgeMap(np.zeros(img.shape, dtype=bool))
    mag = np.where(thin, grad.magnitude, 0.0)
    strong = mag >= params.high_ratio * peak
    weak = mag >= params.low_ratio * peak
    return EdgeMap(hysteresis(strong, weak))


def count_edges(em: BinaryMask) -> int:
    return em.count()


OPERATORS = ("roberts", "prewitt", "canny")
