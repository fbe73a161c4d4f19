"""Brain tumor localization from the bilateral symmetry of MR slices."""

from .errors import BrainSymError, PipelineError
from .edge_detect import CannyParams, EdgeMap, canny, count_edges, prewitt, roberts
from .image_core import (
    BinaryMask,
    GrayImage,
    RgbImage,
    read_pgm,
    read_pnm,
    read_ppm,
    to_grayscale,
    write_pgm,
    write_ppm_overlay,
)
from .phantom import Lesion, PhantomSpec, render_phantom, standard_corpus
from .symmetry import (
    Classification,
    CentroidSeries,
    SymmetryAxis,
    SymmetryVerdict,
    classify_axis,
    edge_centroids,
    evaluate_axis,
    fit_curve_axis,
    fit_straight_axis,
)
from .tumor_detect import (
    BrainMask,
    PipelineConfig,
    Region,
    RegionReport,
    asymmetry_map,
    brain_mask,
    detect_regions,
    reflect_about_axis,
    run_pipeline,
)

__version__ = "0.1.0"
