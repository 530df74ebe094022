"""Within-panel composition of figures and tables.

Horizontal position follows a softmax over ``[r_p, r_g, s_g, 1]``; the width
fraction ``u_g`` follows a linear Gaussian over ``[s_p, l_p, s_g, hpos, 1]``.
A panel is composed by drawing joint samples from that network and keeping
the one that best trades likelihood against filling the panel.
"""

from dataclasses import dataclass
import json
import math

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_is_fitted

from ._validation import check_features, check_nonnegative, check_positive, with_intercept
from .corpus import HPOS_VALUES, ElementPlacement
from .panel_model import VARIANCE_FLOOR, fit_clg

MODEL_VERSION = 1
N_POSITIONS = len(HPOS_VALUES)
SIZE_FEATURES = ("s_p", "l_p", "s_g", "hpos", "intercept")
U_BOUNDS = (0.1, 1.0)
DEFAULT_SAMPLES = 1000
IRLS_L2 = 1e-4
IRLS_TOL = 1e-6
IRLS_MAX_ITER = 200
DIVERGENCE_LIMIT = 1e6


class IRLSDivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class ComposeModel:
    w_h: tuple
    w_u: tuple
    sigma_u: float

    def __post_init__(self):
        w_h = np.asarray(self.w_h, dtype=np.float64)
        if w_h.shape != (N_POSITIONS, 4):
            raise ValueError(f"w_h must be {N_POSITIONS}x4, got shape {w_h.shape}")
        if len(self.w_u) != 5:
            raise ValueError("w_u needs exactly 5 entries")
        if not self.sigma_u > 0:
            raise ValueError("sigma_u must be positive")
        object.__setattr__(self, "w_h", tuple(tuple(float(v) for v in row) for row in w_h))
        object.__setattr__(self, "w_u", tuple(float(v) for v in self.w_u))

    def to_dict(self):
        return {
            "w_h": [list(row) for row in self.w_h],
            "w_u": list(self.w_u),
            "sigma_u": float(self.sigma_u),
            "version": MODEL_VERSION,
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("version", MODEL_VERSION) != MODEL_VERSION:
            raise ValueError(f"unsupported compose model version {data.get('version')!r}")
        return cls(w_h=data["w_h"], w_u=data["w_u"], sigma_u=float(data["sigma_u"]))

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class FillConstraint:
    """Weights of the likelihood and panel-fill terms of the composition score.

    ``beta`` converts a panel's text ratio into poster area; ``rho`` is the
    tolerated deviation between content area and panel area.
    """

    lambda1: float = 1.0
    lambda2: float = 1.0
    beta: float = 0.5
    rho: float = 0.05

    def __post_init__(self):
        check_nonnegative(self.lambda1, "lambda1")
        check_nonnegative(self.lambda2, "lambda2")
        check_positive(self.beta, "beta")
        check_positive(self.rho, "rho")
        if self.lambda1 + self.lambda2 <= 0:
            raise ValueError("lambda1 + lambda2 must be positive")


@dataclass(frozen=True)
class PanelComposition:
    panel_index: int
    placements: tuple
    score: float


def hpos_code(label):
    if isinstance(label, str):
        return HPOS_VALUES.index(label)
    code = int(label)
    if not 0 <= code < N_POSITIONS:
        raise ValueError(f"position code out of range: {label!r}")
    return code


def _softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _log_softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


class PositionClassifier(ClassifierMixin, BaseEstimator):
    """Multinomial logistic regression on ``[r_p, r_g, s_g]`` fitted by IRLS.

    The last class's weights are pinned at zero. Classes are always the
    three position codes, whether or not all of them occur in ``y``.
    """

    def __init__(self, l2=IRLS_L2, tol=IRLS_TOL, max_iter=IRLS_MAX_ITER):
        self.l2 = l2
        self.tol = tol
        self.max_iter = max_iter

    def _objective(self, free, X, Y):
        W = np.vstack([free, np.zeros((1, X.shape[1]))])
        logp = _log_softmax(X @ W.T)
        return float(np.sum(Y * logp)) - 0.5 * self.l2 * float(np.sum(free**2))

    def fit(self, X, y):
        X = with_intercept(check_features(X, 3))
        codes = np.array([hpos_code(v) for v in y], dtype=int)
        if codes.shape[0] != X.shape[0]:
            raise ValueError("X and y have different lengths")
        if codes.size == 0:
            raise ValueError("cannot fit positions without data")
        n, d = X.shape
        k = N_POSITIONS - 1
        Y = np.eye(N_POSITIONS)[codes]
        free = np.zeros((k, d))
        objective = self._objective(free, X, Y)
        self.n_iter_ = 0
        for it in range(1, self.max_iter + 1):
            W = np.vstack([free, np.zeros((1, d))])
            P = _softmax(X @ W.T)
            grad = ((Y - P)[:, :k].T @ X) - self.l2 * free
            hess = np.zeros((k * d, k * d))
            for a in range(k):
                for b in range(k):
                    coef = P[:, a] * ((a == b) - P[:, b])
                    hess[a * d:(a + 1) * d, b * d:(b + 1) * d] = (X * coef[:, None]).T @ X
            hess += self.l2 * np.eye(k * d)
            step = np.linalg.solve(hess, grad.ravel()).reshape(k, d)
            # backtrack until the penalized likelihood does not drop
            scale = 1.0
            while True:
                candidate = free + scale * step
                cand_obj = self._objective(candidate, X, Y)
                if cand_obj >= objective - 1e-12 or scale < 1e-10:
                    break
                scale *= 0.5
            change = float(np.max(np.abs(candidate - free)))
            free, objective = candidate, cand_obj
            self.n_iter_ = it
            if not np.all(np.isfinite(free)) or np.max(np.abs(free)) > DIVERGENCE_LIMIT:
                raise IRLSDivergenceError(
                    "position weights diverged; increase the L2 regularization strength"
                )
            if change < self.tol:
                break
        self.coef_ = np.vstack([free, np.zeros((1, d))])
        self.classes_ = np.arange(N_POSITIONS)
        self.n_features_in_ = 3
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "coef_")
        return _softmax(with_intercept(check_features(X, 3)) @ self.coef_.T)

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)


class ElementSizeRegressor(RegressorMixin, BaseEstimator):
    """Linear Gaussian for ``u_g`` over ``[s_p, l_p, s_g, hpos_code]``."""

    def fit(self, X, y):
        X = check_features(X, 4)
        self.coef_, self.sigma_ = fit_clg(X, np.asarray(y, dtype=np.float64), SIZE_FEATURES, 6)
        self.n_features_in_ = 4
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        return with_intercept(check_features(X, 4)) @ self.coef_


def fit_size_cpd(rows):
    """Closed-form ML fit from rows ``(s_p, l_p, s_g, hpos_code, u_g)``."""
    rows = np.asarray(rows, dtype=np.float64).reshape(-1, 5)
    if rows.shape[0] < 6:
        raise ValueError(f"need at least 6 elements to fit the size CPD, got {rows.shape[0]}")
    est = ElementSizeRegressor().fit(rows[:, :4], rows[:, 4])
    return est.coef_, est.sigma_


def fit_position_cpd(rows, l2=IRLS_L2, max_iter=IRLS_MAX_ITER, return_estimator=False):
    """IRLS fit from rows ``(r_p, r_g, s_g, hpos)``; returns the 3x4 weight matrix."""
    rows = list(rows)
    X = np.array([r[:3] for r in rows], dtype=np.float64).reshape(-1, 3)
    est = PositionClassifier(l2=l2, max_iter=max_iter).fit(X, [r[3] for r in rows])
    return est if return_estimator else est.coef_


def _check_model(model):
    if model is None:
        raise NotFittedError("compose model is not trained")


def predict_position(model, r_p, r_g, s_g):
    """Softmax probabilities of (left, center, right)."""
    _check_model(model)
    x = np.stack(np.broadcast_arrays(r_p, r_g, s_g, 1.0), axis=-1).astype(np.float64)
    return _softmax(x @ np.asarray(model.w_h).T)


def size_mean(model, s_p, l_p, s_g, code):
    x = np.stack(np.broadcast_arrays(s_p, l_p, s_g, code, 1.0), axis=-1).astype(np.float64)
    return x @ np.asarray(model.w_u)


def element_area(u_g, panel_width, r_g, page_aspect=1.0):
    """Poster-normalized area of an element drawn at ``u_g`` of the panel width.

    ``page_aspect`` is the poster's physical width over height; it converts a
    physical element aspect into normalized page units.
    """
    width = np.asarray(u_g) * panel_width
    return width * width * page_aspect / np.asarray(r_g)


def _log_normal(x, mean, sigma):
    return -0.5 * math.log(2 * math.pi) - np.log(sigma) - 0.5 * ((x - mean) / sigma) ** 2


def composition_score(model, constraint, panel, rect, elements, codes, u, paper_page, page_aspect=1.0):
    """Composition objective for one or many assignments.

    ``codes`` and ``u`` have shape ``(m,)`` or ``(n, m)`` for ``m`` elements.
    """
    codes = np.atleast_2d(codes)
    u = np.atleast_2d(np.asarray(u, dtype=np.float64))
    s_p, r_p = rect.area, rect.aspect
    loglik = np.zeros(codes.shape[0])
    content = np.full(codes.shape[0], constraint.beta * panel.t_p)
    for j, el in enumerate(elements):
        s_g = el.relative_size(*paper_page)
        logp = np.log(predict_position(model, r_p, el.aspect, s_g))
        mean = size_mean(model, s_p, panel.l_p, s_g, codes[:, j])
        loglik += logp[codes[:, j]] + _log_normal(u[:, j], mean, model.sigma_u)
        content += element_area(u[:, j], rect.w, el.aspect, page_aspect)
    fill = _log_normal(rect.area, content, constraint.rho)
    return constraint.lambda1 * loglik + constraint.lambda2 * fill


def compose_panel(
    model,
    constraint,
    panel,
    rect,
    elements,
    n_samples=DEFAULT_SAMPLES,
    seed=0,
    panel_index=0,
    paper_page=(8.5, 11.0),
    page_aspect=1.0,
):
    """Highest-scoring of ``n_samples`` ancestral samples of (hpos, u_g) per element.

    ``rect`` is the panel's realized rectangle in page-normalized units.
    Sampled widths are clamped to ``[0.1, 1]`` before scoring.
    """
    _check_model(model)
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    elements = list(elements)
    if not elements:
        return PanelComposition(panel_index=panel_index, placements=(), score=0.0)

    rng = np.random.default_rng(seed)
    s_p, r_p = rect.area, rect.aspect
    m = len(elements)
    codes = np.empty((n_samples, m), dtype=int)
    u = np.empty((n_samples, m))
    for j, el in enumerate(elements):
        s_g = el.relative_size(*paper_page)
        probs = predict_position(model, r_p, el.aspect, s_g)
        codes[:, j] = np.minimum(np.searchsorted(np.cumsum(probs), rng.random(n_samples), side="right"), N_POSITIONS - 1)
        mean = size_mean(model, s_p, panel.l_p, s_g, codes[:, j])
        u[:, j] = mean + model.sigma_u * rng.standard_normal(n_samples)
    u = np.clip(u, *U_BOUNDS)

    scores = composition_score(model, constraint, panel, rect, elements, codes, u, paper_page, page_aspect)
    best = int(np.argmax(scores))
    placements = tuple(
        ElementPlacement(
            element_id=el.id,
            hpos=HPOS_VALUES[codes[best, j]],
            u_g=float(u[best, j]),
            section_id=el.section_id,
        )
        for j, el in enumerate(elements)
    )
    return PanelComposition(panel_index=panel_index, placements=placements, score=float(scores[best]))


def calibrate_beta(panel_areas, text_ratios, element_areas):
    """Median poster area per unit of text ratio over panels that carry text."""
    values = [
        max(area - elements, 0.0) / t
        for area, t, elements in zip(panel_areas, text_ratios, element_areas)
        if t > 0
    ]
    if not values:
        raise ValueError("no panel with text to calibrate beta from")
    return max(float(np.median(values)), VARIANCE_FLOOR)
