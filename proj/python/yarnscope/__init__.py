"""Yarn image metrology: diameter, twist, hairiness, slubs, splices, packing, texture and grade."""

import json

from ._yarnscope import (
    AnalysisError,
    ParameterError,
    ParseError,
    __version__,
    analyze_texture,
    band_threshold,
    calibrate,
    classify_opening,
    detect_slubs,
    haar_roundtrip,
    histogram_level_diameter,
    one_way_anova,
    otsu_threshold,
    pairwise_mean_diff,
    px_to_mm,
    run_cli,
    separate_core,
    trommer_band,
    twist_angle,
)
from . import _yarnscope


def render_yarn(stripes=False, **spec):
    """Synthetic yarn image; keyword arguments override the render defaults.

    Hairs and slubs are lists of dicts, e.g. ``slubs=[{"start": 100, "length": 300, "width": 25}]``.
    """
    return _yarnscope._render_yarn(json.dumps(spec), stripes)


def render_fiber_field(**spec):
    """Parallel one-pixel filaments at ``angle_deg`` from the x axis."""
    return _yarnscope._render_fiber_field(json.dumps(spec))


__all__ = [
    "AnalysisError",
    "ParameterError",
    "ParseError",
    "__version__",
    "analyze_texture",
    "band_threshold",
    "calibrate",
    "classify_opening",
    "detect_slubs",
    "haar_roundtrip",
    "histogram_level_diameter",
    "one_way_anova",
    "otsu_threshold",
    "pairwise_mean_diff",
    "px_to_mm",
    "render_fiber_field",
    "render_yarn",
    "run_cli",
    "separate_core",
    "trommer_band",
    "twist_angle",
]
