"""Sub-aperture, EPI, lenslet and macro-pixel representations.

The macro-pixel image keeps the pixel budget of one view: each disjoint
``k x k`` block of the output holds ``k**2`` angular samples of a single
spatial anchor instead of ``k**2`` neighbouring spatial samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import CenterPolicy, LightField4D, ViewIndex, check_valid
from .errors import EmptyOutputError, GeometryError, OutOfRangeError, ParameterError, TradeoffError

SIZE_POLICIES = ("crop", "pad")
ORIENTATIONS = ("horizontal", "vertical")


def extract_view(lf: LightField4D, idx) -> np.ndarray:
    """Sub-aperture image ``lf[u, v]`` of shape ``(H, W, C)``."""
    check_valid(lf)
    u, v = _as_index(idx)
    ViewIndex(u, v).check(lf.angular_rows, lf.angular_cols)
    return lf.samples[u, v]


def center_view(lf: LightField4D, policy: Optional[CenterPolicy] = None) -> np.ndarray:
    check_valid(lf)
    cu, cv = (policy or CenterPolicy()).resolve(lf.angular_rows, lf.angular_cols)
    return lf.samples[cu, cv]


def _as_index(idx) -> tuple[int, int]:
    if isinstance(idx, ViewIndex):
        return idx.u, idx.v
    u, v = idx
    return int(u), int(v)


# -- macro-pixels -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MacroPixelImage:
    """Macro-pixel image plus the metadata needed to audit how it was built."""

    pixels: np.ndarray
    k: int
    window_origin: tuple[int, int]
    anchor_offset: int
    size_policy: str
    source_dims: tuple[int, int, int, int]
    center: tuple[int, int]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.pixels.shape

    def metadata(self) -> dict:
        return {
            "k": self.k,
            "window_origin": list(self.window_origin),
            "anchor_offset": self.anchor_offset,
            "size_policy": self.size_policy,
            "source_dims": list(self.source_dims),
            "center": list(self.center),
        }


def check_tradeoff(U: int, V: int, H: int, W: int, k: int, size_policy: str) -> None:
    if size_policy not in SIZE_POLICIES:
        raise ParameterError(f"size_policy must be one of {SIZE_POLICIES}, got {size_policy!r}")
    if int(k) != k or not (1 <= k <= min(U, V)):
        raise TradeoffError(
            f"macro-pixel size k={k} must satisfy 1 <= k <= min(U, V) = {min(U, V)}")
    if size_policy == "crop" and (H < k or W < k):
        raise EmptyOutputError(
            f"spatial grid {H}x{W} is smaller than k={k}; cropping would leave no pixels")


def window_origin(U: int, V: int, k: int, center: tuple[int, int]) -> tuple[int, int]:
    """Top-left view of the ``k x k`` window around ``center``, shifted inward if needed."""
    off = (k - 1) // 2
    cu, cv = center
    u0 = min(max(cu - off, 0), U - k)
    v0 = min(max(cv - off, 0), V - k)
    return u0, v0


def macropixel_shape(H: int, W: int, k: int, size_policy: str = "crop") -> tuple[int, int]:
    """Output spatial size: largest ``k``-divisible prefix (crop) or unchanged (pad)."""
    if size_policy == "pad":
        return H, W
    return (H // k) * k, (W // k) * k


def _anchor_axis(n: int, k: int, size_policy: str, coords: np.ndarray) -> np.ndarray:
    """Spatial anchor for output coordinates along one axis."""
    off = (k - 1) // 2
    block = coords // k
    if size_policy == "pad":
        # partial border blocks reuse the last full block's anchor
        block = np.minimum(block, max(n // k - 1, 0))
        return np.minimum(block * k + off, n - 1)
    return block * k + off


def _index_maps(dims, k, policy, size_policy):
    U, V, H, W = dims
    check_tradeoff(U, V, H, W, k, size_policy)
    center = (policy or CenterPolicy()).resolve(U, V)
    u0, v0 = window_origin(U, V, k, center)
    Hp, Wp = macropixel_shape(H, W, k, size_policy)
    rows = np.arange(Hp)
    cols = np.arange(Wp)
    return {
        "center": center,
        "origin": (u0, v0),
        "out_shape": (Hp, Wp),
        "u": u0 + rows % k,
        "x": _anchor_axis(H, k, size_policy, rows),
        "v": v0 + cols % k,
        "y": _anchor_axis(W, k, size_policy, cols),
    }


def macropixel_map(dims, k: int, policy: Optional[CenterPolicy] = None,
                   size_policy: str = "crop", r: int = 0, c: int = 0) -> tuple[int, int, int, int]:
    """Source index ``(u, v, x, y)`` read by output pixel ``(r, c)``.

    ``dims`` is ``(U, V, H, W)`` of the source light field.
    """
    maps = _index_maps(tuple(int(d) for d in dims), int(k), policy, size_policy)
    Hp, Wp = maps["out_shape"]
    if not (0 <= r < Hp and 0 <= c < Wp):
        raise OutOfRangeError(f"output pixel ({r}, {c}) outside {Hp}x{Wp}")
    return (int(maps["u"][r]), int(maps["v"][c]), int(maps["x"][r]), int(maps["y"][c]))


def build_macropixel(lf: LightField4D, k: int, policy: Optional[CenterPolicy] = None,
                     size_policy: str = "crop") -> MacroPixelImage:
    """Replace the middle view's pixels by ``k x k`` macro-pixels of angular samples.

    Output pixel ``(r, c)`` lies in block ``(r // k, c // k)`` at within-block
    offset ``(a, b) = (r % k, c % k)`` and reads view ``(u0 + a, v0 + b)`` at
    the block's anchor, ``block * k + (k - 1) // 2`` on each axis. The view
    window origin ``(u0, v0)`` is centred on the middle perspective (floor
    bias for even ``k``) and shifted inward when it would leave the grid.

    Parameters
    ----------
    lf : LightField4D
    k : int
        Views per macro-pixel side, ``1 <= k <= min(U, V)``. ``k = 1``
        reproduces the middle view exactly.
    policy : CenterPolicy, optional
        Middle perspective; defaults to ``(U // 2, V // 2)``.
    size_policy : {"crop", "pad"}
        ``crop`` drops the bottom/right remainder that does not fill a
        block; ``pad`` keeps ``H x W`` and lets partial border blocks reuse
        the nearest full anchor.

    Returns
    -------
    MacroPixelImage
    """
    check_valid(lf)
    maps = _index_maps((lf.angular_rows, lf.angular_cols, lf.height, lf.width),
                       int(k), policy, size_policy)
    u = maps["u"][:, None]
    x = maps["x"][:, None]
    v = maps["v"][None, :]
    y = maps["y"][None, :]
    pixels = lf.samples[u, v, x, y]
    return MacroPixelImage(
        pixels=pixels,
        k=int(k),
        window_origin=maps["origin"],
        anchor_offset=(int(k) - 1) // 2,
        size_policy=size_policy,
        source_dims=(lf.angular_rows, lf.angular_cols, lf.height, lf.width),
        center=maps["center"],
    )


# -- EPIs -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EpiSlice:
    """Epipolar-plane image, ``values`` shaped ``(angular, spatial, C)``.

    Horizontal slices fix ``(u, x)`` and run over ``(v, y)``; vertical
    slices fix ``(v, y)`` and run over ``(u, x)``.
    """

    values: np.ndarray
    orientation: str
    fixed_spatial: int
    fixed_angular: int

    @property
    def angular_extent(self) -> int:
        return self.values.shape[0]

    @property
    def spatial_extent(self) -> int:
        return self.values.shape[1]


def _normalize_orientation(orientation: str) -> str:
    aliases = {"h": "horizontal", "v": "vertical"}
    name = aliases.get(orientation, orientation)
    if name not in ORIENTATIONS:
        raise ParameterError(f"orientation must be 'horizontal' or 'vertical', got {orientation!r}")
    return name


def extract_epi(lf: LightField4D, orientation: str, fixed_spatial: int, fixed_angular: int) -> EpiSlice:
    """Slice an EPI.

    Horizontal: ``E[v, y] = lf[fixed_angular, v, fixed_spatial, y]``.
    Vertical: ``E[u, x] = lf[u, fixed_angular, x, fixed_spatial]``.
    """
    check_valid(lf)
    orientation = _normalize_orientation(orientation)
    if orientation == "horizontal":
        spatial_n, angular_n = lf.height, lf.angular_rows
        spatial_name, angular_name = "spatial row x0", "angular row u0"
    else:
        spatial_n, angular_n = lf.width, lf.angular_cols
        spatial_name, angular_name = "spatial col y0", "angular col v0"
    if not 0 <= fixed_spatial < spatial_n:
        raise OutOfRangeError(f"{spatial_name}={fixed_spatial} outside [0, {spatial_n})")
    if not 0 <= fixed_angular < angular_n:
        raise OutOfRangeError(f"{angular_name}={fixed_angular} outside [0, {angular_n})")
    if orientation == "horizontal":
        values = lf.samples[fixed_angular, :, fixed_spatial, :, :]
    else:
        values = lf.samples[:, fixed_angular, :, fixed_spatial, :]
    return EpiSlice(values=values, orientation=orientation,
                    fixed_spatial=int(fixed_spatial), fixed_angular=int(fixed_angular))


# -- lenslet mosaics ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LensletMosaic:
    """Raw-sensor style tiling: ``pixels[x*U + u, y*V + v] = lf[u, v, x, y]``."""

    pixels: np.ndarray
    angular_dims: tuple[int, int]


def to_lenslet(lf: LightField4D) -> LensletMosaic:
    check_valid(lf)
    U, V, H, W, C = lf.shape
    # (u, v, x, y, c) -> (x, u, y, v, c) then merge (x, u) and (y, v)
    pixels = lf.samples.transpose(2, 0, 3, 1, 4).reshape(H * U, W * V, C)
    return LensletMosaic(pixels=pixels, angular_dims=(U, V))


def from_lenslet(mosaic: LensletMosaic) -> LightField4D:
    """Exact inverse of :func:`to_lenslet`."""
    pixels = np.asarray(mosaic.pixels)
    if pixels.ndim == 2:
        pixels = pixels[..., np.newaxis]
    U, V = (int(a) for a in mosaic.angular_dims)
    if pixels.ndim != 3 or U < 1 or V < 1:
        raise GeometryError(f"invalid mosaic shape {pixels.shape} for angular dims ({U}, {V})")
    rows, cols, C = pixels.shape
    if rows % U or cols % V or rows == 0 or cols == 0:
        raise GeometryError(
            f"mosaic of size {rows}x{cols} is not divisible by angular dims (U, V) = ({U}, {V})")
    H, W = rows // U, cols // V
    samples = pixels.reshape(H, U, W, V, C).transpose(1, 3, 0, 2, 4)
    return LightField4D.from_array(samples)
