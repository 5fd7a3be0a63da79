"""Lossless PNG and light-field directory I/O.

A light-field directory holds ``meta.json`` plus either one PNG per view
(``view_UU_VV.png``) or a single ``lenslet.png`` mosaic. ``meta.json``::

    {"angular_rows": U, "angular_cols": V, "height": H, "width": W,
     "channels": C, "bit_depth": 8 | 16,
     "center_row": optional int, "center_col": optional int}

All writers are deterministic: JSON keys are sorted and PNGs carry no
timestamps, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import cv2
import numpy as np

from .core import CenterPolicy, LightField4D
from .errors import FormatError
from .representations import LensletMosaic, from_lenslet, to_lenslet

META_NAME = "meta.json"
LENSLET_NAME = "lenslet.png"
_DTYPES = {8: np.uint8, 16: np.uint16}
_META_KEYS = ("angular_rows", "angular_cols", "height", "width", "channels", "bit_depth")


def view_filename(u: int, v: int) -> str:
    return f"view_{u:02d}_{v:02d}.png"


def encode_png(image: np.ndarray) -> bytes:
    """Encode an ``(H, W)`` / ``(H, W, 1)`` / ``(H, W, 3)`` uint8 or uint16 array (RGB order)."""
    img = np.asarray(image)
    if img.dtype not in (np.uint8, np.uint16):
        raise FormatError(f"PNG output needs uint8 or uint16 samples, got {img.dtype}")
    if img.ndim == 3 and img.shape[2] == 1:
        img = img[:, :, 0]
    elif img.ndim == 3 and img.shape[2] == 3:
        img = img[:, :, ::-1]
    elif img.ndim != 2:
        raise FormatError(f"cannot write image of shape {img.shape} as PNG")
    ok, buf = cv2.imencode(".png", np.ascontiguousarray(img))
    if not ok:
        raise FormatError("PNG encoding failed")
    return buf.tobytes()


def write_png(path, image: np.ndarray) -> None:
    Path(path).write_bytes(encode_png(image))


def read_png(path) -> np.ndarray:
    """Read a PNG as ``(H, W, C)`` with C in {1, 3}, RGB order, native bit depth."""
    path = Path(path)
    data = np.frombuffer(path.read_bytes(), dtype=np.uint8)
    img = cv2.imdecode(data, cv2.IMREAD_UNCHANGED)
    if img is None:
        raise FormatError(f"{path}: not a readable image")
    if img.ndim == 2:
        return img[:, :, np.newaxis]
    if img.shape[2] == 4:
        raise FormatError(f"{path}: alpha channel not supported")
    return img[:, :, ::-1].copy()


def write_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def lightfield_meta(lf: LightField4D, policy: Optional[CenterPolicy] = None) -> dict:
    if lf.dtype not in (np.uint8, np.uint16):
        raise FormatError(f"light fields are stored as 8 or 16 bit; got {lf.dtype}")
    meta = {
        "angular_rows": lf.angular_rows,
        "angular_cols": lf.angular_cols,
        "height": lf.height,
        "width": lf.width,
        "channels": lf.channels,
        "bit_depth": 8 * lf.dtype.itemsize,
    }
    if policy is not None and policy.center_row is not None:
        meta["center_row"] = int(policy.center_row)
    if policy is not None and policy.center_col is not None:
        meta["center_col"] = int(policy.center_col)
    return meta


def read_meta(directory) -> dict:
    path = Path(directory) / META_NAME
    try:
        meta = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise FormatError(f"{path}: missing") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(meta, dict):
        raise FormatError(f"{path}: expected a JSON object")
    missing = [k for k in _META_KEYS if k not in meta]
    if missing:
        raise FormatError(f"{path}: missing keys {missing}")
    if meta["bit_depth"] not in _DTYPES:
        raise FormatError(f"{path}: bit_depth must be 8 or 16, got {meta['bit_depth']!r}")
    return meta


def meta_center_policy(meta: dict) -> CenterPolicy:
    return CenterPolicy(meta.get("center_row"), meta.get("center_col"))


def write_lightfield(lf: LightField4D, directory, form: str = "views",
                     policy: Optional[CenterPolicy] = None) -> Path:
    """Write ``lf`` as a view directory (``form="views"``) or lenslet form."""
    directory = Path(directory)
    meta = lightfield_meta(lf, policy)
    directory.mkdir(parents=True, exist_ok=True)
    if form == "views":
        for u in range(lf.angular_rows):
            for v in range(lf.angular_cols):
                write_png(directory / view_filename(u, v), lf.samples[u, v])
    elif form == "lenslet":
        write_png(directory / LENSLET_NAME, to_lenslet(lf).pixels)
    else:
        raise FormatError(f"unknown light-field form {form!r}")
    write_json(directory / META_NAME, meta)
    return directory


def _check_image(path, img, meta, shape):
    dtype = _DTYPES[meta["bit_depth"]]
    if img.dtype != dtype:
        raise FormatError(f"{path}: expected {meta['bit_depth']}-bit samples, got {img.dtype}")
    if img.shape != shape:
        raise FormatError(f"{path}: expected shape {shape}, got {img.shape}")


def read_lightfield(directory) -> LightField4D:
    """Load a light-field directory in either view or lenslet form."""
    lf, _ = read_lightfield_with_policy(directory)
    return lf


def read_lightfield_with_policy(directory) -> tuple[LightField4D, CenterPolicy]:
    directory = Path(directory)
    meta = read_meta(directory)
    U, V = meta["angular_rows"], meta["angular_cols"]
    H, W, C = meta["height"], meta["width"], meta["channels"]
    lenslet = directory / LENSLET_NAME
    if lenslet.exists():
        img = read_png(lenslet)
        _check_image(lenslet, img, meta, (H * U, W * V, C))
        lf = from_lenslet(LensletMosaic(pixels=img, angular_dims=(U, V)))
    else:
        samples = np.empty((U, V, H, W, C), dtype=_DTYPES[meta["bit_depth"]])
        for u in range(U):
            for v in range(V):
                path = directory / view_filename(u, v)
                if not path.exists():
                    raise FormatError(f"{path}: missing view")
                img = read_png(path)
                _check_image(path, img, meta, (H, W, C))
                samples[u, v] = img
        lf = LightField4D.from_array(samples)
    policy = meta_center_policy(meta)
    policy.resolve(U, V)
    return lf, policy
