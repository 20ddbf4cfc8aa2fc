"""Image preprocessing: white-pad to square, resize, normalize.

Figures are padded to a square with pure white pixels *before* resizing, so
aspect ratios survive and diagrams are never distorted; grayscale and
palette images are converted to 3-channel RGB first.
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image

IMAGENET_MEAN = np.array([0.485, 0.456, 0.406], dtype=np.float32)
IMAGENET_STD = np.array([0.229, 0.224, 0.225], dtype=np.float32)

DEFAULT_SIDE = 224


def pad_to_square(image: Image.Image) -> Image.Image:
    """Center the image on a pure-white square canvas of side max(w, h)."""
    w, h = image.size
    if w == h:
        return image
    side = max(w, h)
    canvas = Image.new("RGB", (side, side), (255, 255, 255))
    canvas.paste(image, ((side - w) // 2, (side - h) // 2))
    return canvas


def load_rgb(path: Union[str, Path]) -> Image.Image:
    """Decode to RGB; grayscale inputs get their channel replicated to 3."""
    with Image.open(path) as img:
        return img.convert("RGB")


def to_model_array(image: Image.Image, side: int = DEFAULT_SIDE) -> np.ndarray:
    """White-pad to square, resize to side x side, scale to [0, 1], and
    normalize with the ImageNet channel statistics. Returns (3, side, side)
    float32, channels first."""
    if side < 1:
        raise ValueError("target side length must be positive")
    squared = pad_to_square(image.convert("RGB"))
    resized = squared.resize((side, side), Image.BILINEAR)
    arr = np.asarray(resized, dtype=np.float32) / 255.0
    arr = (arr - IMAGENET_MEAN) / IMAGENET_STD
    return arr.transpose(2, 0, 1)


def preprocess_file(path: Union[str, Path], side: int = DEFAULT_SIDE) -> np.ndarray:
    return to_model_array(load_rgb(path), side=side)
