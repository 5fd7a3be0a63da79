"""scikit-learn compatible wrappers around the representation and disparity code.

``X`` is a batch of light fields: a list of :class:`LightField4D` or
arrays, a single light field, or a 6D ``(n, U, V, H, W, C)`` array. Outputs
are stacked numpy arrays, so the transformers drop into a
:class:`sklearn.pipeline.Pipeline` ahead of a flattening step and a model.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .core import CenterPolicy, LightField4D, check_valid
from .disparity import block_match_disparity, epi_slope
from .errors import InvalidDimensionError, ParameterError
from .representations import (
    LensletMosaic,
    check_tradeoff,
    build_macropixel,
    center_view,
    extract_epi,
    from_lenslet,
    macropixel_shape,
    to_lenslet,
)


def check_lightfield(lf) -> LightField4D:
    """Coerce a light field or a 4D/5D array into a validated :class:`LightField4D`."""
    if isinstance(lf, LightField4D):
        return check_valid(lf)
    return LightField4D.from_array(np.asarray(lf))


def check_lightfield_batch(X) -> list[LightField4D]:
    """Coerce ``X`` into a non-empty list of light fields sharing one shape.

    Arrays are read as one light field when 4D/5D and as a batch when 6D;
    pass a list to batch 4D grayscale arrays.
    """
    if isinstance(X, LightField4D):
        batch = [X]
    elif isinstance(X, np.ndarray) and X.dtype != object:
        if X.ndim in (4, 5):
            batch = [X]
        elif X.ndim == 6:
            batch = list(X)
        else:
            raise InvalidDimensionError(
                f"expected a 4D/5D light field or a 6D batch, got shape {X.shape}")
    else:
        batch = list(X)
    if not batch:
        raise InvalidDimensionError("empty batch of light fields")
    lfs = [check_lightfield(item) for item in batch]
    shape = lfs[0].shape
    for i, lf in enumerate(lfs[1:], start=1):
        if lf.shape != shape:
            raise InvalidDimensionError(f"light field {i} has shape {lf.shape}, expected {shape}")
    return lfs


def _center_policy(center) -> CenterPolicy:
    if center is None:
        return CenterPolicy()
    if isinstance(center, CenterPolicy):
        return center
    row, col = center
    return CenterPolicy(row, col)


class _LightFieldTransformer(TransformerMixin, BaseEstimator):
    """Records the light-field shape at fit time and checks it on transform."""

    def _fit_shape(self, X):
        lfs = check_lightfield_batch(X)
        self.lightfield_shape_ = lfs[0].shape
        return lfs

    def _check_shape(self, X):
        check_is_fitted(self, "lightfield_shape_")
        lfs = check_lightfield_batch(X)
        if lfs[0].shape != self.lightfield_shape_:
            raise InvalidDimensionError(
                f"{type(self).__name__} was fitted on light fields of shape "
                f"{self.lightfield_shape_}, got {lfs[0].shape}")
        return lfs

    def fit(self, X, y=None):
        self._fit_shape(X)
        return self


class CenterViewTransformer(_LightFieldTransformer):
    """Middle sub-aperture view of each light field, ``(n, H, W, C)``."""

    def __init__(self, center=None):
        self.center = center

    def fit(self, X, y=None):
        lfs = self._fit_shape(X)
        _center_policy(self.center).resolve(*lfs[0].angular_shape)
        return self

    def transform(self, X):
        lfs = self._check_shape(X)
        policy = _center_policy(self.center)
        return np.stack([center_view(lf, policy) for lf in lfs])


class MacroPixelTransformer(_LightFieldTransformer):
    """Macro-pixel images with ``k x k`` angular samples per block.

    Parameters
    ----------
    k : int
        Views per macro-pixel side; ``k=1`` yields the middle view.
    size_policy : {"crop", "pad"}
    center : (int, int) or CenterPolicy, optional

    Attributes
    ----------
    lightfield_shape_ : tuple
        ``(U, V, H, W, C)`` seen during ``fit``.
    output_shape_ : tuple
        ``(H', W', C)`` of each transformed sample.
    window_origin_ : tuple
        Top-left view of the angular window.
    """

    def __init__(self, k=2, size_policy="crop", center=None):
        self.k = k
        self.size_policy = size_policy
        self.center = center

    def fit(self, X, y=None):
        lfs = self._fit_shape(X)
        U, V, H, W, C = lfs[0].shape
        check_tradeoff(U, V, H, W, self.k, self.size_policy)
        probe = build_macropixel(lfs[0], self.k, _center_policy(self.center), self.size_policy)
        self.window_origin_ = probe.window_origin
        self.output_shape_ = macropixel_shape(H, W, self.k, self.size_policy) + (C,)
        return self

    def transform(self, X):
        lfs = self._check_shape(X)
        policy = _center_policy(self.center)
        return np.stack([build_macropixel(lf, self.k, policy, self.size_policy).pixels
                         for lf in lfs])


class LensletTransformer(_LightFieldTransformer):
    """Lenslet mosaics ``(n, H*U, W*V, C)``; ``inverse_transform`` decodes them."""

    def transform(self, X):
        lfs = self._check_shape(X)
        return np.stack([to_lenslet(lf).pixels for lf in lfs])

    def inverse_transform(self, X):
        check_is_fitted(self, "lightfield_shape_")
        U, V = self.lightfield_shape_[:2]
        mosaics = np.asarray(X)
        if mosaics.ndim == 2:
            mosaics = mosaics[..., np.newaxis]
        elif mosaics.ndim == 3 and self.lightfield_shape_[4] == 1:
            mosaics = mosaics[..., np.newaxis]
        if mosaics.ndim == 3:
            mosaics = mosaics[np.newaxis]
        return np.stack([from_lenslet(LensletMosaic(m, (U, V))).samples for m in mosaics])


class EPITransformer(_LightFieldTransformer):
    """Epipolar-plane images ``(n, angular, spatial, C)``.

    ``None`` fixed indices default to the middle spatial line and middle view.
    """

    def __init__(self, orientation="horizontal", fixed_spatial=None, fixed_angular=None):
        self.orientation = orientation
        self.fixed_spatial = fixed_spatial
        self.fixed_angular = fixed_angular

    def _fixed(self, lf):
        horizontal = self.orientation in ("horizontal", "h")
        spatial = self.fixed_spatial
        if spatial is None:
            spatial = lf.height // 2 if horizontal else lf.width // 2
        angular = self.fixed_angular
        if angular is None:
            angular = lf.angular_rows // 2 if horizontal else lf.angular_cols // 2
        return spatial, angular

    def fit(self, X, y=None):
        lfs = self._fit_shape(X)
        extract_epi(lfs[0], self.orientation, *self._fixed(lfs[0]))
        return self

    def transform(self, X):
        lfs = self._check_shape(X)
        return np.stack([extract_epi(lf, self.orientation, *self._fixed(lf)).values for lf in lfs])


class BlockMatchingDisparity(BaseEstimator):
    """SAD block-matching disparity between two views of each light field.

    ``predict`` returns ``(n, H, W)`` integer disparities; the confidence
    maps of the last call are kept in ``confidence_``.
    """

    def __init__(self, reference=None, target=None, disparity_range=(-3, 3), radius=2):
        self.reference = reference
        self.target = target
        self.disparity_range = disparity_range
        self.radius = radius

    def _views(self, shape):
        U, V = shape[:2]
        reference = self.reference if self.reference is not None else (U // 2, V // 2)
        target = self.target
        if target is None:
            cu, cv = reference
            if V > 1:
                target = (cu, cv + 1 if cv + 1 < V else cv - 1)
            elif U > 1:
                target = (cu + 1 if cu + 1 < U else cu - 1, cv)
            else:
                raise ParameterError("a single-view light field has no baseline")
        return tuple(reference), tuple(target)

    def fit(self, X, y=None):
        lfs = check_lightfield_batch(X)
        self.lightfield_shape_ = lfs[0].shape
        self.reference_, self.target_ = self._views(self.lightfield_shape_)
        # surface parameter errors at fit time
        block_match_disparity(lfs[0], self.reference_, self.target_,
                              self.disparity_range, self.radius)
        return self

    def predict(self, X):
        check_is_fitted(self, "reference_")
        lfs = check_lightfield_batch(X)
        maps = [block_match_disparity(lf, self.reference_, self.target_,
                                      self.disparity_range, self.radius) for lf in lfs]
        self.confidence_ = np.stack([m.confidence for m in maps])
        return np.stack([m.values for m in maps])


class EPISlopeEstimator(BaseEstimator):
    """Dominant EPI slope (pixels per view step) for each light field."""

    def __init__(self, orientation="horizontal", fixed_spatial=None, fixed_angular=None,
                 max_shift=None):
        self.orientation = orientation
        self.fixed_spatial = fixed_spatial
        self.fixed_angular = fixed_angular
        self.max_shift = max_shift

    def fit(self, X, y=None):
        self.epi_ = EPITransformer(self.orientation, self.fixed_spatial, self.fixed_angular).fit(X)
        return self

    def predict(self, X):
        check_is_fitted(self, "epi_")
        lfs = self.epi_._check_shape(X)
        slopes = []
        for lf in lfs:
            epi = extract_epi(lf, self.orientation, *self.epi_._fixed(lf))
            slopes.append(epi_slope(epi, self.max_shift)[0])
        return np.asarray(slopes)
