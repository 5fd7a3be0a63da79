"""4D light-field container, index conventions and synthetic generators.

Samples are stored in canonical ``(u, v, x, y, c)`` order: angular row,
angular column, spatial row, spatial column, channel. A sub-aperture view is
therefore the contiguous slice ``samples[u, v]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import InvalidDimensionError, OutOfRangeError, ValidationError

SUPPORTED_DTYPES = (np.dtype(np.uint8), np.dtype(np.uint16), np.dtype(np.float32), np.dtype(np.float64))
VALID_CHANNELS = (1, 3)


@dataclass(frozen=True)
class ViewIndex:
    u: int
    v: int

    def check(self, angular_rows: int, angular_cols: int) -> "ViewIndex":
        if not (0 <= self.u < angular_rows):
            raise OutOfRangeError(f"angular row {self.u} outside [0, {angular_rows})")
        if not (0 <= self.v < angular_cols):
            raise OutOfRangeError(f"angular col {self.v} outside [0, {angular_cols})")
        return self


@dataclass(frozen=True)
class CenterPolicy:
    """Which view counts as the middle perspective.

    ``None`` on either axis means ``floor(n / 2)``, which for an even grid
    picks the lower/right of the two central views.
    """

    center_row: Optional[int] = None
    center_col: Optional[int] = None

    def resolve(self, angular_rows: int, angular_cols: int) -> tuple[int, int]:
        cu = angular_rows // 2 if self.center_row is None else int(self.center_row)
        cv = angular_cols // 2 if self.center_col is None else int(self.center_col)
        ViewIndex(cu, cv).check(angular_rows, angular_cols)
        return cu, cv


@dataclass(frozen=True)
class Violation:
    """First broken invariant found by :func:`validate`."""

    kind: str
    message: str
    expected: object = None
    actual: object = None

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


@dataclass(frozen=True, eq=False)
class LightField4D:
    """Dense light field with samples indexed ``(u, v, x, y, c)``.

    The constructor stores what it is given so that :func:`validate` can
    report problems as data; use :meth:`from_array` or :func:`make_lightfield`
    for checked construction. Checked instances hold a read-only array.
    """

    angular_rows: int
    angular_cols: int
    height: int
    width: int
    channels: int
    samples: np.ndarray

    @classmethod
    def from_array(cls, array) -> "LightField4D":
        """Wrap a ``(U, V, H, W)`` or ``(U, V, H, W, C)`` array (copied, read-only)."""
        arr = np.array(array, copy=True)
        if arr.ndim == 4:
            arr = arr[..., np.newaxis]
        if arr.ndim != 5:
            raise InvalidDimensionError(
                f"expected a 4D or 5D array, got shape {arr.shape}")
        arr.setflags(write=False)
        lf = cls(*arr.shape, samples=arr)
        violation = validate(lf)
        if violation is not None:
            if violation.kind in ("dimension", "channels"):
                raise InvalidDimensionError(str(violation))
            raise ValidationError(violation)
        return lf

    @property
    def shape(self) -> tuple[int, int, int, int, int]:
        return (self.angular_rows, self.angular_cols, self.height, self.width, self.channels)

    @property
    def angular_shape(self) -> tuple[int, int]:
        return (self.angular_rows, self.angular_cols)

    @property
    def spatial_shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @property
    def dtype(self) -> np.dtype:
        return self.samples.dtype

    @property
    def sample_model(self) -> str:
        """``"uint8"``, ``"uint16"`` or ``"normalized"`` (floats in [0, 1])."""
        if self.samples.dtype.kind == "f":
            return "normalized"
        return self.samples.dtype.name

    @property
    def max_value(self) -> float:
        if self.samples.dtype.kind == "f":
            return 1.0
        return float(np.iinfo(self.samples.dtype).max)

    def __getitem__(self, index):
        return self.samples[index]

    def view(self, u: int, v: int) -> np.ndarray:
        ViewIndex(u, v).check(self.angular_rows, self.angular_cols)
        return self.samples[u, v]

    def with_sample(self, index: tuple, value) -> "LightField4D":
        """Return a copy with one sample replaced; the original is untouched."""
        arr = self.samples.copy()
        arr[index] = value
        return LightField4D.from_array(arr)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LightField4D):
            return NotImplemented
        return (self.shape == other.shape and self.dtype == other.dtype
                and np.array_equal(self.samples, other.samples))

    def __repr__(self) -> str:
        return (f"LightField4D(U={self.angular_rows}, V={self.angular_cols}, "
                f"H={self.height}, W={self.width}, C={self.channels}, dtype={self.dtype})")


def validate(lf: LightField4D) -> Optional[Violation]:
    """Return the first violated invariant of ``lf``, or ``None`` when it is well formed."""
    dims = (lf.angular_rows, lf.angular_cols, lf.height, lf.width)
    names = ("angular_rows", "angular_cols", "height", "width")
    for name, value in zip(names, dims):
        if not isinstance(value, (int, np.integer)) or value < 1:
            return Violation("dimension", f"{name} must be a positive integer, got {value!r}",
                             expected=">= 1", actual=value)
    if lf.channels not in VALID_CHANNELS:
        return Violation("channels", f"channels must be 1 or 3, got {lf.channels!r}",
                         expected=VALID_CHANNELS, actual=lf.channels)
    samples = np.asarray(lf.samples)
    expected = int(np.prod(dims)) * int(lf.channels)
    if samples.size != expected:
        return Violation("size",
                         f"sample count {samples.size} != U*V*H*W*C = {expected}",
                         expected=expected, actual=int(samples.size))
    if samples.shape != lf.shape:
        return Violation("shape", f"samples shape {samples.shape} != {lf.shape}",
                         expected=lf.shape, actual=samples.shape)
    if samples.dtype not in SUPPORTED_DTYPES:
        return Violation("dtype", f"unsupported sample dtype {samples.dtype}",
                         expected=[d.name for d in SUPPORTED_DTYPES], actual=samples.dtype.name)
    if samples.dtype.kind == "f" and samples.size and (
            not np.isfinite(samples).all() or samples.min() < 0 or samples.max() > 1):
        return Violation("range", "normalized samples must lie in [0, 1]",
                         expected=(0.0, 1.0), actual=(float(samples.min()), float(samples.max())))
    return None


def check_valid(lf: LightField4D) -> LightField4D:
    violation = validate(lf)
    if violation is not None:
        raise ValidationError(violation)
    return lf


Fill = Union[int, float, Callable[..., object]]


def make_lightfield(U: int, V: int, H: int, W: int, C: int = 1,
                    fill: Fill = 0, dtype=np.uint16) -> LightField4D:
    """Build a light field with ``samples[u, v, x, y, c] = fill(u, v, x, y, c)``.

    ``fill`` is either a constant or a vectorised callable; it receives
    broadcastable integer index grids, one per axis.

    >>> lf = make_lightfield(3, 3, 4, 4, 1, fill=coded_fill)
    >>> int(lf[1, 2, 0, 3, 0])
    1203
    """
    for name, value in zip("UVHW", (U, V, H, W)):
        if int(value) != value or value < 1:
            raise InvalidDimensionError(f"{name} must be a positive integer, got {value!r}")
    if C not in VALID_CHANNELS:
        raise InvalidDimensionError(f"C must be 1 or 3, got {C!r}")
    shape = (U, V, H, W, C)
    if callable(fill):
        grids = np.ogrid[0:U, 0:V, 0:H, 0:W, 0:C]
        values = np.broadcast_to(np.asarray(fill(*grids)), shape)
    else:
        values = np.full(shape, fill)
    return LightField4D.from_array(_cast_checked(values, dtype))


def _cast_checked(values: np.ndarray, dtype) -> np.ndarray:
    dtype = np.dtype(dtype)
    if dtype.kind in "ui":
        info = np.iinfo(dtype)
        if values.size and (values.min() < info.min or values.max() > info.max):
            raise InvalidDimensionError(f"values do not fit in {dtype.name}")
    return values.astype(dtype)


def coded_fill(u, v, x, y, c=0):
    """Fill encoding the index as decimal digits: ``1000u + 100v + 10x + y``."""
    return 1000 * u + 100 * v + 10 * x + y + 0 * c


def _parallax_offsets(n: int, center: int, d: int) -> np.ndarray:
    return d * (np.arange(n) - center)


def synth_planar(U: int, V: int, H: int, W: int, texture, d: int,
                 policy: Optional[CenterPolicy] = None,
                 origin: Optional[tuple[int, int]] = None, dtype=np.uint16) -> LightField4D:
    """Fronto-parallel plane at constant integer disparity ``d``.

    ``samples[u, v, x, y] = texture[x + d*(u - cu), y + d*(v - cv)]`` in
    texture coordinates. With an array texture those coordinates are offset
    by ``origin``; by default the origin is chosen so the smallest read lands
    on index 0. A callable texture is evaluated on index grids directly and
    cast to ``dtype``; array textures keep their own dtype.

    Raises
    ------
    OutOfRangeError
        If an array texture does not cover every shifted read.
    """
    if int(d) != d:
        raise InvalidDimensionError(f"disparity must be an integer, got {d!r}")
    d = int(d)
    for name, value in zip("UVHW", (U, V, H, W)):
        if int(value) != value or value < 1:
            raise InvalidDimensionError(f"{name} must be a positive integer, got {value!r}")
    cu, cv = (policy or CenterPolicy()).resolve(U, V)
    du = _parallax_offsets(U, cu, d)
    dv = _parallax_offsets(V, cv, d)
    rows = du[:, None, None, None] + np.arange(H)[None, None, :, None]
    cols = dv[None, :, None, None] + np.arange(W)[None, None, None, :]

    if callable(texture):
        values = np.asarray(texture(rows, cols))
        values = np.broadcast_to(values, (U, V, H, W) + values.shape[4:])
        return LightField4D.from_array(_cast_checked(values, dtype))

    tex = np.asarray(texture)
    if tex.ndim not in (2, 3):
        raise InvalidDimensionError(f"texture must be 2D or 3D, got shape {tex.shape}")
    if origin is None:
        origin = (-int(du.min()), -int(dv.min()))
    ox, oy = origin
    lo_r, hi_r = int(rows.min()) + ox, int(rows.max()) + ox
    lo_c, hi_c = int(cols.min()) + oy, int(cols.max()) + oy
    if lo_r < 0 or lo_c < 0 or hi_r >= tex.shape[0] or hi_c >= tex.shape[1]:
        raise OutOfRangeError(
            f"texture of size {tex.shape[:2]} cannot cover reads rows [{lo_r}, {hi_r}] "
            f"cols [{lo_c}, {hi_c}]; need at least "
            f"{H + abs(d) * (U - 1)}x{W + abs(d) * (V - 1)} with a matching origin")
    return LightField4D.from_array(tex[rows + ox, cols + oy])


def required_texture_shape(U: int, V: int, H: int, W: int, d: int) -> tuple[int, int]:
    return (H + abs(d) * (U - 1), W + abs(d) * (V - 1))


def noise_texture(shape, rng=None, dtype=np.uint16) -> np.ndarray:
    """Uniform random texture spanning the dtype's full range."""
    rng = np.random.default_rng(rng)
    dtype = np.dtype(dtype)
    if dtype.kind == "f":
        return rng.random(shape).astype(dtype)
    return rng.integers(0, np.iinfo(dtype).max, size=shape, endpoint=True, dtype=dtype)


def ramp_texture(shape, dtype=np.uint16) -> np.ndarray:
    """Deterministic ``10*row + col`` ramp (clipped to the dtype range)."""
    rows, cols = np.indices(shape)
    dtype = np.dtype(dtype)
    values = 10 * rows + cols
    if dtype.kind in "ui":
        values = np.clip(values, 0, np.iinfo(dtype).max)
    return values.astype(dtype)
