"""Disparity between sub-aperture views and EPI line slopes.

Block-matching disparity is measured in pixels per view step: content at
``y`` in the reference is looked up at ``y - d*n`` in a target ``n >= 1``
view steps away (rows instead of columns for a vertical baseline).
For a target on the +u/+v side of the reference this equals the ``d`` of
:func:`lfmacro.core.synth_planar`; for a target on the opposite side it is
``-d``, so swapping reference and target negates the map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LightField4D, ViewIndex, check_valid
from .errors import InsufficientViewsError, ParameterError, UnsupportedBaselineError
from .representations import EpiSlice

CONFIDENCE_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class DisparityMap:
    values: np.ndarray
    confidence: np.ndarray
    disparity_range: tuple[int, int]
    radius: int
    reference: tuple[int, int]
    target: tuple[int, int]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def params(self) -> dict:
        return {
            "range": list(self.disparity_range),
            "radius": self.radius,
            "reference": list(self.reference),
            "target": list(self.target),
        }


def _box_sum(img: np.ndarray, radius: int) -> np.ndarray:
    """Sum over ``(2r+1)^2`` windows centred on each pixel; NaN-free, valid part only.

    Returns an array aligned with ``img`` where entries whose window leaves
    the image are zero; callers mask those out.
    """
    H, W = img.shape
    size = 2 * radius + 1
    out = np.zeros_like(img)
    if H < size or W < size:
        return out
    integral = np.zeros((H + 1, W + 1), dtype=img.dtype)
    integral[1:, 1:] = img.cumsum(0).cumsum(1)
    sums = (integral[size:, size:] - integral[:-size, size:]
            - integral[size:, :-size] + integral[:-size, :-size])
    out[radius:H - radius, radius:W - radius] = sums
    return out


def _candidate_order(d_min: int, d_max: int) -> list[int]:
    # scanning in this order and keeping strict improvements breaks ties toward small |d|
    return sorted(range(d_min, d_max + 1), key=lambda d: (abs(d), d))


def block_match_disparity(lf: LightField4D, reference, target,
                          disparity_range: tuple[int, int] = (-3, 3),
                          radius: int = 2) -> DisparityMap:
    """Integer disparity by sum-of-absolute-differences block matching.

    For every reference pixel the candidate ``d`` in ``disparity_range``
    minimising the SAD over a ``(2*radius+1)^2`` block against the target
    view shifted by ``d * n`` (``n`` = unsigned number of view steps
    between the views) wins. Equal costs resolve toward the smaller ``|d|`` (then the smaller
    ``d``). Confidence is ``(second - best) / (second + 1e-9)`` on costs
    measured in normalised intensity; pixels where some candidate block
    does not fit inside both views get confidence 0 and the in-range
    candidate closest to 0.
    """
    check_valid(lf)
    ref = ViewIndex(*_pair(reference)).check(lf.angular_rows, lf.angular_cols)
    tgt = ViewIndex(*_pair(target)).check(lf.angular_rows, lf.angular_cols)
    d_min, d_max = (int(d) for d in disparity_range)
    if d_min > d_max:
        raise ParameterError(f"empty disparity range [{d_min}, {d_max}]")
    if int(radius) != radius or radius < 1:
        raise ParameterError(f"block radius must be an integer >= 1, got {radius!r}")
    du, dv = tgt.u - ref.u, tgt.v - ref.v
    if du == 0 and dv == 0:
        raise ParameterError("reference and target views must differ")
    if du != 0 and dv != 0:
        raise UnsupportedBaselineError(
            f"diagonal baseline {(ref.u, ref.v)} -> {(tgt.u, tgt.v)}; views must share a row or a column")

    ref_img = lf.samples[ref.u, ref.v]
    tgt_img = lf.samples[tgt.u, tgt.v]
    integral = lf.dtype.kind in "ui"
    work = np.int64 if integral else np.float64
    ref_img = ref_img.astype(work)
    tgt_img = tgt_img.astype(work)
    if du != 0:
        # vertical baseline: transpose so the shift always runs along axis 1
        ref_img = ref_img.transpose(1, 0, 2)
        tgt_img = tgt_img.transpose(1, 0, 2)
    steps = abs(du if du != 0 else dv)
    H, W = ref_img.shape[:2]

    candidates = _candidate_order(d_min, d_max)
    shifts = [d * steps for d in candidates]
    valid = np.zeros((H, W), dtype=bool)
    valid[radius:H - radius, radius:W - radius] = True
    cols = np.arange(W)
    for s in shifts:
        valid &= ((cols - radius - s) >= 0)[None, :] & ((cols + radius - s) < W)[None, :]

    best = np.full((H, W), np.inf)
    second = np.full((H, W), np.inf)
    best_d = np.full((H, W), candidates[0], dtype=np.int64)
    for d, s in zip(candidates, shifts):
        shifted = np.zeros_like(tgt_img)
        # shifted[:, y] = tgt[:, y - s]
        lo, hi = max(s, 0), min(W + s, W)
        if lo < hi:
            shifted[:, lo:hi] = tgt_img[:, lo - s:hi - s]
        cost = _box_sum(np.abs(ref_img - shifted).sum(axis=2), radius).astype(np.float64)
        cost /= lf.max_value
        better = cost < best
        second = np.where(better, best, np.minimum(second, cost))
        best = np.where(better, cost, best)
        best_d = np.where(better, d, best_d)

    if len(candidates) > 1:
        confidence = (second - best) / (second + CONFIDENCE_EPS)
    else:
        confidence = np.zeros((H, W))
    confidence = np.where(valid, confidence, 0.0)
    values = np.where(valid, best_d, candidates[0])
    if du != 0:
        values = values.T
        confidence = confidence.T
    return DisparityMap(values=np.ascontiguousarray(values),
                        confidence=np.ascontiguousarray(np.clip(confidence, 0.0, 1.0)),
                        disparity_range=(d_min, d_max), radius=int(radius),
                        reference=(ref.u, ref.v), target=(tgt.u, tgt.v))


def _pair(idx) -> tuple[int, int]:
    if isinstance(idx, ViewIndex):
        return idx.u, idx.v
    u, v = idx
    return int(u), int(v)


def _row_offset(center: np.ndarray, row: np.ndarray, max_shift: int) -> int:
    """Integer ``o`` maximising the normalised correlation of ``row[y]`` with ``center[y + o]``."""
    n = center.size
    best_score, best_o = -np.inf, 0
    for o in sorted(range(-max_shift, max_shift + 1), key=lambda o: (abs(o), o)):
        lo, hi = max(0, -o), min(n, n - o)
        a = row[lo:hi]
        b = center[lo + o:hi + o]
        a = a - a.mean()
        b = b - b.mean()
        denom = np.sqrt((a * a).sum() * (b * b).sum())
        score = (a * b).sum() / denom if denom > 0 else (1.0 if np.array_equal(a, b) else 0.0)
        if score > best_score + 1e-12:
            best_score, best_o = score, o
    return best_o


def epi_slope(epi: EpiSlice, max_shift: int | None = None) -> tuple[float, float]:
    """Slope of the dominant EPI line in pixels per view step, and its RMS residual.

    Every angular row is cross-correlated against the centre row (index
    ``n // 2``) to find the integer offset ``o`` with
    ``row[y] ~ center[y + o]``; a least-squares line through the offsets
    versus view step gives the slope.
    """
    values = np.asarray(epi.values, dtype=np.float64)
    if values.ndim == 3:
        values = values.mean(axis=2)
    n_views, width = values.shape
    if n_views < 2:
        raise InsufficientViewsError(f"EPI has {n_views} angular sample(s); need at least 2")
    if max_shift is None:
        max_shift = max((width - 1) // 2, 0)
    max_shift = min(int(max_shift), width - 1)
    center_idx = n_views // 2
    center = values[center_idx]
    steps = np.arange(n_views) - center_idx
    offsets = np.array([_row_offset(center, values[i], max_shift) for i in range(n_views)],
                       dtype=np.float64)
    slope, intercept = np.polyfit(steps, offsets, 1)
    residual = float(np.sqrt(np.mean((offsets - (slope * steps + intercept)) ** 2)))
    return float(slope), residual
