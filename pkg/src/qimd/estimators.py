"""Scikit-learn style wrappers around the two phase estimators.

Both estimators consume count records as 2-D arrays: one row per record,
one column per phase setting.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .analytics import ScanPlan, _distill
from .exceptions import NoFringeInformationError

__all__ = ["PhaseDistiller", "FringeInverter"]


class PhaseDistiller(TransformerMixin, BaseEstimator):
    """Recover the phase from counts at ``M`` equally spaced settings.

    Parameters
    ----------
    steps : int, optional
        Number of settings. Inferred from the column count when ``None``.

    Attributes
    ----------
    thetas_ : ndarray of shape (steps,)
        Settings ``2 pi j / M`` for ``j = 1..M``.
    """

    def __init__(self, steps=None):
        self.steps = steps

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        steps = X.shape[1] if self.steps is None else int(self.steps)
        if X.shape[1] != steps:
            raise ValueError(f"expected {steps} settings per record, got {X.shape[1]}")
        plan = ScanPlan(steps)
        plan.require_distillation()
        self.thetas_ = plan.thetas()
        self.n_features_in_ = steps
        return self

    def transform(self, X):
        """Quadratures ``(S, -D)`` whose angle is the phase estimate."""
        check_is_fitted(self, "thetas_")
        X = self._check(X)
        return np.column_stack([X @ np.sin(self.thetas_), -(X @ np.cos(self.thetas_))])

    def predict(self, X):
        check_is_fitted(self, "thetas_")
        X = self._check(X)
        phases, dead = _distill(X, self.thetas_)
        if np.any(dead):
            raise NoFringeInformationError(f"{int(dead.sum())} record(s) carry no fringe modulation")
        return phases

    def _check(self, X):
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} settings per record, got {X.shape[1]}")
        return X


class FringeInverter(BaseEstimator):
    """Invert a single-setting count through a characterised fringe.

    The fringe is ``N(phi) = offset - depth * cos(phi)``, i.e. ``offset =
    n_n + A`` and ``depth = A C``. Parameters left as ``None`` are learned in
    :meth:`fit` from a calibration scan by least squares on
    ``[1, cos phi, sin phi]``.

    Parameters
    ----------
    offset, depth : float, optional
    branch : {1, -1}
        Sign of the phase, which the arccos inversion cannot resolve.
    """

    def __init__(self, offset=None, depth=None, branch=1):
        self.offset = offset
        self.depth = depth
        self.branch = branch

    def fit(self, X=None, y=None):
        """Characterise the fringe.

        Parameters
        ----------
        X : array_like of shape (n_settings,) or (n_settings, 1), optional
            Calibration phases; required unless both parameters are given.
        y : array_like of shape (n_settings,), optional
            Mean counts at those phases.
        """
        if self.branch not in (1, -1):
            raise ValueError("branch must be 1 or -1")
        if self.offset is not None and self.depth is not None:
            offset, depth = float(self.offset), float(self.depth)
        else:
            if X is None or y is None:
                raise ValueError("calibration phases and counts are required to learn the fringe")
            phi = check_array(np.reshape(X, (-1, 1)), dtype=float).ravel()
            counts = np.asarray(y, dtype=float).ravel()
            if len(phi) != len(counts):
                raise ValueError("phases and counts differ in length")
            design = np.column_stack([np.ones_like(phi), np.cos(phi), np.sin(phi)])
            coef, *_ = np.linalg.lstsq(design, counts, rcond=None)
            offset = float(coef[0]) if self.offset is None else float(self.offset)
            depth = float(-coef[1]) if self.depth is None else float(self.depth)
        if depth <= 0.0:
            raise NoFringeInformationError("fringe depth must be positive")
        self.offset_ = offset
        self.depth_ = depth
        return self

    def cosine(self, counts):
        """Unclipped ``cos(phi)`` implied by each count."""
        check_is_fitted(self, "depth_")
        counts = np.asarray(counts, dtype=float)
        return (self.offset_ - counts) / self.depth_

    def predict(self, counts):
        c = self.cosine(counts)
        return self.branch * np.arccos(np.clip(c, -1.0, 1.0))

    def clipped_fraction(self, counts) -> float:
        return float(np.mean(np.abs(self.cosine(counts)) > 1.0))
