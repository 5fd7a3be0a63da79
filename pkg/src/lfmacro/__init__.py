"""Light-field representations for studying the spatio-angular trade-off.

Sub-aperture views, EPIs, lenslet mosaics and macro-pixel images of a 4D
light field, plus block-matching disparity, a convolution cost model and a
dataset export pipeline.
"""

from .core import (
    CenterPolicy,
    LightField4D,
    ViewIndex,
    Violation,
    make_lightfield,
    synth_planar,
    validate,
)
from .costmodel import ConvLayerSpec, CostReport, conv_out_dims, layer_macs, pipeline_cost
from .dataset import (
    DatasetManifest,
    LayoutSpec,
    ReprSpec,
    SampleRecord,
    export_representation,
    scan_corpus,
    split_by_variation,
)
from .disparity import DisparityMap, block_match_disparity, epi_slope
from .estimators import (
    BlockMatchingDisparity,
    CenterViewTransformer,
    EPISlopeEstimator,
    EPITransformer,
    LensletTransformer,
    MacroPixelTransformer,
)
from .representations import (
    EpiSlice,
    LensletMosaic,
    MacroPixelImage,
    build_macropixel,
    center_view,
    extract_epi,
    extract_view,
    from_lenslet,
    macropixel_map,
    to_lenslet,
)

__version__ = "0.1.0"

__all__ = [
    "BlockMatchingDisparity", "CenterPolicy", "CenterViewTransformer", "ConvLayerSpec",
    "CostReport", "DatasetManifest", "DisparityMap", "EPISlopeEstimator", "EPITransformer",
    "EpiSlice", "LayoutSpec", "LensletMosaic", "LensletTransformer", "LightField4D",
    "MacroPixelImage", "MacroPixelTransformer", "ReprSpec", "SampleRecord", "ViewIndex",
    "Violation", "block_match_disparity", "build_macropixel", "center_view", "conv_out_dims",
    "epi_slope", "export_representation", "extract_epi", "extract_view", "from_lenslet",
    "layer_macs", "macropixel_map", "make_lightfield", "pipeline_cost", "scan_corpus",
    "split_by_variation", "synth_planar", "to_lenslet", "validate",
]
