"""Panel size and aspect ratio as conditional linear Gaussians of (t_p, n_p, g_p)."""

from dataclasses import dataclass
import json
import math

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_is_fitted

from ._validation import check_features, collinear_columns, with_intercept

MODEL_VERSION = 1
FEATURES = ("t_p", "n_p", "g_p", "intercept")
VARIANCE_FLOOR = 1e-8
MIN_ROWS = 5
SIZE_FLOOR = 0.01
RATIO_BOUNDS = (0.2, 5.0)


@dataclass(frozen=True)
class TrainingRow:
    t_p: float
    n_p: float
    g_p: float
    s_p: float
    r_p: float

    def __post_init__(self):
        values = (self.t_p, self.n_p, self.g_p, self.s_p, self.r_p)
        if not all(math.isfinite(v) for v in values):
            raise ValueError("training rows must be finite")
        if not (0 <= self.t_p <= 1 and 0 <= self.g_p <= 1):
            raise ValueError("t_p and g_p must lie in [0, 1]")


@dataclass(frozen=True)
class PanelModel:
    w_s: tuple
    sigma_s: float
    w_r: tuple
    sigma_r: float

    def __post_init__(self):
        if len(self.w_s) != 4 or len(self.w_r) != 4:
            raise ValueError("panel model weight vectors need exactly 4 entries")
        if not (self.sigma_s > 0 and self.sigma_r > 0):
            raise ValueError("panel model standard deviations must be positive")

    def to_dict(self):
        return {
            "w_s": [float(v) for v in self.w_s],
            "sigma_s": float(self.sigma_s),
            "w_r": [float(v) for v in self.w_r],
            "sigma_r": float(self.sigma_r),
            "version": MODEL_VERSION,
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("version", MODEL_VERSION) != MODEL_VERSION:
            raise ValueError(f"unsupported panel model version {data.get('version')!r}")
        return cls(
            w_s=tuple(float(v) for v in data["w_s"]),
            sigma_s=float(data["sigma_s"]),
            w_r=tuple(float(v) for v in data["w_r"]),
            sigma_r=float(data["sigma_r"]),
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def fit_clg(X, y, names, min_rows):
    """ML weights and standard deviation of ``y ~ N(w . [X, 1], sigma)``."""
    design = with_intercept(X)
    if design.shape[0] < min_rows:
        raise ValueError(f"need at least {min_rows} rows to fit, got {design.shape[0]}")
    if np.linalg.matrix_rank(design) < design.shape[1]:
        cols = collinear_columns(design, names)
        raise np.linalg.LinAlgError(f"singular design matrix; collinear columns: {', '.join(cols)}")
    w, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ w
    variance = max(float(np.mean(resid**2)), VARIANCE_FLOOR)
    return w, math.sqrt(variance)


class PanelAttributeModel(RegressorMixin, BaseEstimator):
    """Estimator over features ``[t_p, n_p, g_p]`` with targets ``[s_p, r_p]``.

    ``predict`` returns the CPD means, which are also the modes.
    """

    def fit(self, X, y):
        X = check_features(X, 3)
        y = np.asarray(y, dtype=np.float64)
        if y.ndim != 2 or y.shape != (X.shape[0], 2):
            raise ValueError("y must have shape (n_samples, 2) holding [s_p, r_p]")
        self.w_s_, self.sigma_s_ = fit_clg(X, y[:, 0], FEATURES, MIN_ROWS)
        self.w_r_, self.sigma_r_ = fit_clg(X, y[:, 1], FEATURES, MIN_ROWS)
        self.n_features_in_ = 3
        return self

    def predict(self, X):
        check_is_fitted(self, "w_s_")
        design = with_intercept(check_features(X, 3))
        return np.column_stack([design @ self.w_s_, design @ self.w_r_])

    def to_params(self):
        check_is_fitted(self, "w_s_")
        return PanelModel(
            w_s=tuple(self.w_s_.tolist()),
            sigma_s=self.sigma_s_,
            w_r=tuple(self.w_r_.tolist()),
            sigma_r=self.sigma_r_,
        )

    @classmethod
    def from_params(cls, model):
        est = cls()
        est.w_s_ = np.asarray(model.w_s, dtype=np.float64)
        est.w_r_ = np.asarray(model.w_r, dtype=np.float64)
        est.sigma_s_ = model.sigma_s
        est.sigma_r_ = model.sigma_r
        est.n_features_in_ = 3
        return est


def _rows_to_arrays(rows):
    X = np.array([[r.t_p, r.n_p, r.g_p] for r in rows], dtype=np.float64).reshape(-1, 3)
    y = np.array([[r.s_p, r.r_p] for r in rows], dtype=np.float64).reshape(-1, 2)
    return X, y


def fit(rows):
    rows = list(rows)
    if len(rows) < MIN_ROWS:
        raise ValueError(f"need at least {MIN_ROWS} panels to fit, got {len(rows)}")
    X, y = _rows_to_arrays(rows)
    return PanelAttributeModel().fit(X, y).to_params()


def predict_means(model, specs):
    """Raw CPD means ``(s, r)`` per panel, before normalization or clamping."""
    if model is None:
        raise NotFittedError("panel model is not trained")
    X = np.array([spec.features for spec in specs], dtype=np.float64).reshape(-1, 3)
    design = with_intercept(X)
    return design @ np.asarray(model.w_s), design @ np.asarray(model.w_r)


def normalize_sizes(raw, floor=SIZE_FLOOR):
    """Scale sizes to sum to one while keeping every entry at least ``floor``."""
    raw = np.maximum(np.asarray(raw, dtype=np.float64), 0.0)
    k = raw.size
    if k * floor > 1:
        raise ValueError(f"cannot give {k} panels a size of at least {floor}")
    if raw.sum() <= 0:
        return np.full(k, 1.0 / k)
    sizes = raw / raw.sum()
    pinned = np.zeros(k, dtype=bool)
    # pin undersized panels at the floor and rescale the rest; at most k rounds
    while True:
        low = (sizes < floor) & ~pinned
        if not low.any():
            break
        pinned |= low
        free = ~pinned
        remaining = 1.0 - floor * pinned.sum()
        sizes = np.where(pinned, floor, 0.0)
        sizes[free] = raw[free] / raw[free].sum() * remaining if raw[free].sum() > 0 else remaining / free.sum()
    return sizes


def infer(model, specs, n_samples=1, seed=None, sample=False, normalize=True):
    """Fill ``s_p`` and ``r_p`` for every panel.

    By default both are the CPD means. With ``sample=True`` each panel draws
    ``n_samples`` values per attribute and keeps the most likely draw, so
    ``n_samples=1`` is a plain random draw.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    specs = list(specs)
    s_mean, r_mean = predict_means(model, specs)
    if sample:
        rng = np.random.default_rng(seed)
        s_draw = s_mean[:, None] + model.sigma_s * rng.standard_normal((len(specs), n_samples))
        r_draw = r_mean[:, None] + model.sigma_r * rng.standard_normal((len(specs), n_samples))
        # the most likely draw is the one closest to the mean
        idx = np.arange(len(specs))
        s_val = s_draw[idx, np.argmin(np.abs(s_draw - s_mean[:, None]), axis=1)]
        r_val = r_draw[idx, np.argmin(np.abs(r_draw - r_mean[:, None]), axis=1)]
    else:
        s_val, r_val = s_mean, r_mean
    if normalize:
        s_val = normalize_sizes(s_val)
        r_val = np.clip(r_val, *RATIO_BOUNDS)
    return [spec.with_geometry(s, r) for spec, s, r in zip(specs, s_val, r_val)]


def _log_normal(x, mean, sigma):
    return -0.5 * math.log(2 * math.pi) - math.log(sigma) - 0.5 * ((x - mean) / sigma) ** 2


def joint_log_likelihood(model, rows):
    """Log of the product over panels of the two CPD densities."""
    total = 0.0
    for row in rows:
        x = (row.t_p, row.n_p, row.g_p, 1.0)
        mean_s = float(np.dot(model.w_s, x))
        mean_r = float(np.dot(model.w_r, x))
        total += _log_normal(row.s_p, mean_s, model.sigma_s)
        total += _log_normal(row.r_p, mean_r, model.sigma_r)
    return total
