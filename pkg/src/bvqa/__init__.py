"""Blind video quality assessment without references or deep networks.

The library crops a clip into sub-videos, cubes, and sub-cubes, generates
four unsupervised representations per cube (spatial, spatio-color, temporal,
spatio-temporal), selects the most label-relevant dimensions, and regresses
MOS with gradient-boosted trees whose cube scores are ensembled back to a
single video score.
"""

__version__ = "0.1.0"

from .config import RunConfig
from .errors import (
    BvqaError,
    ConfigError,
    DegenerateError,
    FitError,
    FormatError,
    InputError,
    ManifestError,
    ParseError,
    ShapeError,
    StateError,
    TooShortError,
    TruncatedError,
    VersionError,
)
from .media_io import (
    DatasetManifest,
    Frame,
    ManifestEntry,
    SynthSpec,
    VideoClip,
    load_manifest,
    load_video,
    parse_y4m,
    pseudo_mos,
    synthesize_clip,
    write_y4m,
)

__all__ = [
    "BvqaError", "ConfigError", "DegenerateError", "FitError", "FormatError",
    "InputError", "ManifestError", "ParseError", "ShapeError", "StateError",
    "TooShortError", "TruncatedError", "VersionError",
    "RunConfig", "DatasetManifest", "Frame", "ManifestEntry", "SynthSpec",
    "VideoClip", "load_manifest", "load_video", "parse_y4m", "pseudo_mos",
    "synthesize_clip", "write_y4m", "__version__",
]
