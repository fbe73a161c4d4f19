"""Synthetic brain-slice phantoms with known geometry."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidParams
from .image_core import GrayImage, round_half_up

CORPUS_NOISE = 14.0

__all__ = ["Lesion", "PhantomSpec", "render_phantom", "lesion_pixels", "standard_corpus"]


@dataclass(frozen=True)
class Lesion:
    cx: float
    cy: float
    radius: float
    delta: int


@dataclass(frozen=True)
class PhantomSpec:
    width: int = 256
    height: int = 256
    cx: float | None = None          # defaults to the canvas centre
    cy: float | None = None
    semi_x: float = 90.0
    semi_y: float = 110.0
    intensity: int = 120
    lesion: Lesion | None = None
    tilt: float = 0.0                # horizontal shift at the ellipse's lower pole
    bow: float = 0.0                 # horizontal shift at the centre row, zero at the poles
    noise: float = 0.0               # Gaussian noise std-dev
    seed: int = 0

    def __post_init__(self):
        if self.cx is None:
            object.__setattr__(self, "cx", (self.width - 1) / 2.0)
        if self.cy is None:
            object.__setattr__(self, "cy", (self.height - 1) / 2.0)
        self.validate()

    def validate(self):
        if self.width < 1 or self.height < 1:
            raise InvalidParams("canvas must be at least 1x1")
        if self.semi_x <= 0 or self.semi_y <= 0:
            raise InvalidParams("ellipse semi-axes must be positive")
        if not 0 <= self.intensity <= 255:
            raise InvalidParams("brain intensity must lie in [0, 255]")
        if self.noise < 0:
            raise InvalidParams("noise amplitude must be >= 0")
        les = self.lesion
        if les is not None:
            if les.radius <= 0:
                raise InvalidParams("lesion radius must be positive")
            if not -255 <= les.delta <= 255:
                raise InvalidParams("lesion delta must lie in [-255, 255]")
            if not self.inside(np.float64(les.cx), np.float64(les.cy)):
                raise InvalidParams(f"lesion centre ({les.cx}, {les.cy}) lies outside the brain ellipse")

    def shift(self, y):
        """Horizontal displacement of the midline at row ``y``."""
        v = (np.asarray(y, dtype=np.float64) - self.cy) / self.semi_y
        return self.tilt * v + self.bow * (1.0 - v * v)

    def inside(self, x, y):
        u = (x - self.cx - self.shift(y)) / self.semi_x
        v = (y - self.cy) / self.semi_y
        return u * u + v * v <= 1.0


def _grid(spec):
    ys, xs = np.mgrid[0:spec.height, 0:spec.width]
    return xs.astype(np.float64), ys.astype(np.float64)


def brain_pixels(spec: PhantomSpec) -> np.ndarray:
    xs, ys = _grid(spec)
    return spec.inside(xs, ys)


def lesion_pixels(spec: PhantomSpec) -> np.ndarray:
    """Boolean raster of lesion pixels (disk clipped to the brain)."""
    xs, ys = _grid(spec)
    if spec.lesion is None:
        return np.zeros(xs.shape, dtype=bool)
    les = spec.lesion
    disk = (xs - les.cx) ** 2 + (ys - les.cy) ** 2 <= les.radius ** 2
    return disk & spec.inside(xs, ys)


def render_phantom(spec: PhantomSpec) -> GrayImage:
    img = np.where(brain_pixels(spec), float(spec.intensity), 0.0)
    if spec.lesion is not None:
        img[lesion_pixels(spec)] += spec.lesion.delta
    rng = np.random.default_rng(spec.seed)
    # always draw so the noise field depends only on the seed and canvas
    noise = rng.normal(0.0, 1.0, size=img.shape)
    img = img + spec.noise * noise
    return GrayImage(np.clip(round_half_up(img), 0, 255).astype(np.uint8))


def standard_corpus() -> dict[str, PhantomSpec]:
    """Six deterministic phantoms for the edge-count benchmark.

    The noise level is high enough that the single-difference Roberts
    operator responds to texture more than the averaging Prewitt kernel.
    """
    base = PhantomSpec(seed=1, noise=CORPUS_NOISE)
    c = base.cx
    return {
        "p01_clean.pgm": base,
        "p02_lesion_right.pgm": replace(base, seed=2, lesion=Lesion(c + 40, 127.5, 12, 60)),
        "p03_lesion_left_hypo.pgm": replace(base, seed=3, lesion=Lesion(c - 40, 97.5, 15, -60)),
        "p04_bowed.pgm": replace(base, seed=4, bow=6.0),
        "p05_lesion_large.pgm": replace(base, seed=5, lesion=Lesion(c + 45, 147.5, 20, 80)),
        "p06_small_lesion.pgm": replace(base, seed=6, semi_x=80.0, semi_y=100.0,
                                         intensity=140, lesion=Lesion(c - 35, 117.5, 9, 50)),
    }
