"""Python bindings for the bevlab core library."""

from ._core import (
    BevlabError,
    PcaModel,
    bin_depth,
    classify_dynamic,
    consistency_filter,
    elevation_l1,
    hungarian,
    idw_infill,
    igmm_merge,
    iou,
    kmeans,
    mae,
    pca_fit,
    splat,
    stereo_disparity,
    supcon_gradient,
    supcon_loss,
    unsup_ssc_eval,
)

__all__ = [
    "BevlabError",
    "PcaModel",
    "bin_depth",
    "classify_dynamic",
    "consistency_filter",
    "elevation_l1",
    "hungarian",
    "idw_infill",
    "igmm_merge",
    "iou",
    "kmeans",
    "mae",
    "pca_fit",
    "splat",
    "stereo_disparity",
    "supcon_gradient",
    "supcon_loss",
    "unsup_ssc_eval",
]
