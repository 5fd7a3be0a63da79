"""Convolution output geometry and multiply-accumulate counts.

MACs count multiplies only; each also implies roughly one addition, so
FLOPs are about ``2 * MACs``. Bias, activation and pooling are excluded.
Cost depends on input dimensions alone, so two macro-pixel images of equal
size cost the same regardless of the angular resolution they encode.
"""

from __future__ import annotations

import json
import numbers
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import FormatError, GeometryError, ParameterError


@dataclass(frozen=True)
class ConvLayerSpec:
    in_channels: int
    out_channels: int
    kernel: int
    stride: int = 1
    padding: int = 0

    def __post_init__(self):
        for name in ("in_channels", "out_channels", "kernel", "stride"):
            value = getattr(self, name)
            if not isinstance(value, numbers.Integral) or isinstance(value, bool) or value < 1:
                raise ParameterError(f"{name} must be a positive integer, got {value!r}")
        if (not isinstance(self.padding, numbers.Integral) or isinstance(self.padding, bool)
                or self.padding < 0):
            raise ParameterError(f"padding must be a non-negative integer, got {self.padding!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "ConvLayerSpec":
        try:
            return cls(in_channels=data["in_channels"], out_channels=data["out_channels"],
                       kernel=data["kernel"], stride=data.get("stride", 1),
                       padding=data.get("padding", 0))
        except (KeyError, TypeError) as exc:
            raise FormatError(f"bad layer description {data!r}: {exc}") from None


@dataclass(frozen=True)
class LayerCost:
    out_h: int
    out_w: int
    macs: int


@dataclass(frozen=True)
class CostReport:
    input: tuple[int, int, int]
    layers: tuple[LayerCost, ...]
    total_macs: int

    def to_dict(self) -> dict:
        return {
            "input": list(self.input),
            "layers": [{"out": [layer.out_h, layer.out_w], "macs": layer.macs}
                       for layer in self.layers],
            "total_macs": self.total_macs,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def conv_out_dims(in_h: int, in_w: int, spec: ConvLayerSpec) -> tuple[int, int]:
    """``floor((n + 2P - K) / S) + 1`` on each axis."""
    k, s, p = spec.kernel, spec.stride, spec.padding
    if in_h < 1 or in_w < 1:
        raise GeometryError(f"input {in_h}x{in_w} must be at least 1x1")
    if in_h + 2 * p < k or in_w + 2 * p < k:
        raise GeometryError(
            f"kernel {k} larger than padded input {in_h + 2 * p}x{in_w + 2 * p}")
    return (in_h + 2 * p - k) // s + 1, (in_w + 2 * p - k) // s + 1


def layer_macs(in_h: int, in_w: int, spec: ConvLayerSpec) -> int:
    out_h, out_w = conv_out_dims(in_h, in_w, spec)
    return int(out_h) * int(out_w) * int(spec.out_channels) * int(spec.in_channels) * int(spec.kernel) ** 2


def pipeline_cost(input_dims: Sequence[int], layers: Iterable[ConvLayerSpec]) -> CostReport:
    """Chain layers from an ``(h, w, c)`` input and total their MACs.

    Geometry failures are re-raised with ``layer_index`` set to the
    offending layer.
    """
    h, w, c = (int(x) for x in input_dims)
    layers = list(layers)
    costs = []
    cur_h, cur_w, cur_c = h, w, c
    for i, spec in enumerate(layers):
        if spec.in_channels != cur_c:
            raise GeometryError(
                f"layer {i}: expects {spec.in_channels} input channels, receives {cur_c}",
                layer_index=i)
        try:
            out_h, out_w = conv_out_dims(cur_h, cur_w, spec)
        except GeometryError as exc:
            raise GeometryError(f"layer {i}: {exc}", layer_index=i) from None
        costs.append(LayerCost(out_h, out_w, layer_macs(cur_h, cur_w, spec)))
        cur_h, cur_w, cur_c = out_h, out_w, spec.out_channels
    return CostReport(input=(h, w, c), layers=tuple(costs),
                      total_macs=sum(layer.macs for layer in costs))


def load_layers(path) -> list[ConvLayerSpec]:
    """Read a layer stack: a JSON list of layer objects or ``{"layers": [...]}``."""
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON ({exc})") from None
    if isinstance(data, dict):
        data = data.get("layers")
    if not isinstance(data, list):
        raise FormatError(f"{path}: expected a list of layers")
    return [ConvLayerSpec.from_dict(item) for item in data]


# Stem of a ResNet-style network as commonly described (7x7/2 conv, then a
# 3x3 conv); documentation example only, not a model.
RESNET_STEM = (
    ConvLayerSpec(3, 64, 7, stride=2, padding=0),
    ConvLayerSpec(64, 64, 3, stride=1, padding=1),
)
