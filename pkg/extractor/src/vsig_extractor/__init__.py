"""Figure image directory -> VSIG embedding file, via a CNN backbone."""

from .backbone import Backbone, resolve_backbone
from .extract import ExtractReport, ExtractSpec, extract
from .preprocess import load_rgb, pad_to_square, preprocess_file, to_model_array
from .vsig import write_vsig

__all__ = [
    "Backbone",
    "ExtractReport",
    "ExtractSpec",
    "extract",
    "load_rgb",
    "pad_to_square",
    "preprocess_file",
    "resolve_backbone",
    "to_model_array",
    "write_vsig",
]

__version__ = "0.1.0"
