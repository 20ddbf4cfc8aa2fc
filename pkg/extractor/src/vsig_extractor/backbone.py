"""Backbone registry: identifier -> feature extractor over preprocessed images.

Identifiers:

* ``resnet50`` (default): torchvision ResNet-50 pretrained on ImageNet, its
  penultimate pooled layer as a 2048-d feature vector. Needs the torchvision
  weight download on first use.
* ``resnet50-untrained[:SEED]``: the same architecture with seeded random
  initialization. Offline and deterministic; the features are untrained but
  format- and width-identical, which is what tests and air-gapped smoke runs
  need.
* ``tiny[:SEED]``: a small seeded convolutional net (width 32) for fast
  tests.

All extractors run with deterministic algorithms and a single torch thread,
so repeated runs produce identical payloads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import torch
from torch import nn


@dataclass(frozen=True)
class Backbone:
    identifier: str
    width: int
    _forward: Callable[[torch.Tensor], torch.Tensor]

    def features(self, batch: np.ndarray) -> np.ndarray:
        """(n, 3, side, side) float32 -> (n, width) float32."""
        with torch.no_grad():
            out = self._forward(torch.from_numpy(np.ascontiguousarray(batch)))
        return out.numpy().astype(np.float32)


def _configure_determinism() -> None:
    torch.manual_seed(0)
    torch.use_deterministic_algorithms(True)
    torch.set_num_threads(1)


def _resnet50_extractor(weights) -> tuple[nn.Module, int]:
    from torchvision.models import resnet50

    model = resnet50(weights=weights)
    # everything up to and including the global average pool: 2048-d
    trunk = nn.Sequential(*list(model.children())[:-1])
    trunk.eval()
    return trunk, 2048


class _TinyNet(nn.Module):
    def __init__(self, width: int = 32):
        super().__init__()
        self.conv = nn.Sequential(
            nn.Conv2d(3, 16, kernel_size=5, stride=4),
            nn.ReLU(),
            nn.Conv2d(16, width, kernel_size=3, stride=2),
            nn.ReLU(),
            nn.AdaptiveAvgPool2d(1),
        )

    def forward(self, x):
        return self.conv(x)


def _parse_seed(spec: str) -> int:
    return int(spec) if spec else 0


def resolve_backbone(identifier: str) -> Backbone:
    _configure_determinism()
    name, _, arg = identifier.partition(":")
    if name == "resnet50":
        from torchvision.models import ResNet50_Weights

        trunk, width = _resnet50_extractor(ResNet50_Weights.IMAGENET1K_V2)
    elif name == "resnet50-untrained":
        torch.manual_seed(_parse_seed(arg))
        trunk, width = _resnet50_extractor(None)
    elif name == "tiny":
        torch.manual_seed(_parse_seed(arg))
        trunk = _TinyNet()
        trunk.eval()
        width = 32
    else:
        raise ValueError(f"unknown backbone identifier {identifier!r}")

    def forward(batch: torch.Tensor) -> torch.Tensor:
        return trunk(batch).flatten(1)

    return Backbone(identifier=identifier, width=width, _forward=forward)
