"""Evaluation against annotated posters, with a ridge-regression baseline."""

from dataclasses import asdict, dataclass
import json

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from . import panel_model
from ._validation import with_intercept
from .config import RunConfig
from .corpus import CorpusError
from .pipeline import compose_elements, panel_inputs, truth_rect


def _paired(predicted, truth):
    predicted = np.asarray(predicted, dtype=np.float64).ravel()
    truth = np.asarray(truth, dtype=np.float64).ravel()
    if predicted.shape != truth.shape:
        raise ValueError(f"length mismatch: {predicted.size} predictions for {truth.size} targets")
    if predicted.size == 0:
        raise ValueError("cannot score empty vectors")
    return predicted, truth


def rmse(predicted, truth):
    predicted, truth = _paired(predicted, truth)
    residual = predicted - truth
    # scale first so tiny residuals do not square to zero (nor huge ones to inf)
    scale = np.max(np.abs(residual))
    if scale == 0:
        return 0.0
    return float(scale * np.sqrt(np.mean((residual / scale) ** 2)))


def accuracy(predicted, truth):
    predicted, truth = list(predicted), list(truth)
    if len(predicted) != len(truth):
        raise ValueError(f"length mismatch: {len(predicted)} predictions for {len(truth)} labels")
    if not truth:
        raise ValueError("cannot score empty label lists")
    return sum(p == t for p, t in zip(predicted, truth)) / len(truth)


class RidgeBaseline(RegressorMixin, BaseEstimator):
    """Closed-form ridge regression with an unpenalized intercept."""

    def __init__(self, alpha=1.0):
        self.alpha = alpha

    def fit(self, X, y):
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        design = with_intercept(np.asarray(X, dtype=np.float64))
        penalty = self.alpha * np.eye(design.shape[1])
        penalty[-1, -1] = 0.0
        y = np.asarray(y, dtype=np.float64)
        self.coef_ = np.linalg.solve(design.T @ design + penalty, design.T @ y)
        self.n_features_in_ = design.shape[1] - 1
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        return with_intercept(np.asarray(X, dtype=np.float64)) @ self.coef_


def ridge_baseline(train, test, lam):
    """Fit on ``train = (X, y)`` and predict for the ``test`` feature rows."""
    X, y = train
    return RidgeBaseline(alpha=lam).fit(X, y).predict(test)


@dataclass(frozen=True)
class EvalReport:
    rmse_s_p: float
    rmse_r_p: float
    rmse_u_g: float | None
    accuracy_hpos: float | None
    n_panels: int
    n_elements: int
    ridge: dict | None = None

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_markdown(self):
        def cell(v):
            return "n/a" if v is None else f"{v:.4f}"

        lines = [
            f"Panels: {self.n_panels}, elements: {self.n_elements}",
            "",
            "| Method | s_p RMSE | r_p RMSE | u_g RMSE |",
            "|---|---|---|---|",
            f"| Ours | {cell(self.rmse_s_p)} | {cell(self.rmse_r_p)} | {cell(self.rmse_u_g)} |",
        ]
        if self.ridge:
            r = self.ridge
            lines.append(f"| Ridge | {cell(r['rmse_s_p'])} | {cell(r['rmse_r_p'])} | {cell(r['rmse_u_g'])} |")
        lines += [
            "",
            "| Method | h_g accuracy |",
            "|---|---|",
            f"| Ours | {cell(self.accuracy_hpos)} |",
        ]
        return "\n".join(lines) + "\n"


def _collect(samples, config):
    """Per-sample panel specs joined with ground truth, plus element records."""
    records = []
    for sample in samples:
        _, specs = panel_inputs(sample.doc, config)
        truths = []
        for spec in specs:
            try:
                truths.append(sample.annotation.panel(spec.section_id))
            except KeyError:
                raise CorpusError(f"{sample.name}: section {spec.section_id!r} has no annotated panel") from None
        records.append((sample, specs, truths))
    return records


def _ridge_report(train_samples, test_records, config):
    train_records = _collect(train_samples, config)

    def panel_xy(records):
        X, y = [], []
        for _, specs, truths in records:
            for spec, truth in zip(specs, truths):
                X.append(spec.features)
                y.append((truth.s_p, truth.r_p))
        return np.array(X), np.array(y)

    def element_xy(records):
        X, y = [], []
        for sample, specs, truths in records:
            doc = sample.doc
            for spec, truth in zip(specs, truths):
                for pl in sample.annotation.placements_for(spec.section_id):
                    el = doc.element(pl.element_id)
                    X.append((truth.s_p, truth.r_p, spec.l_p, doc.element_size(el), el.aspect))
                    y.append(pl.u_g)
        return np.array(X).reshape(-1, 5), np.array(y)

    Xp, yp = panel_xy(train_records)
    s_pred, r_pred, s_true, r_true = [], [], [], []
    for _, specs, truths in test_records:
        X = np.array([spec.features for spec in specs])
        s_raw = ridge_baseline((Xp, yp[:, 0]), X, config.ridge_lambda)
        r_raw = ridge_baseline((Xp, yp[:, 1]), X, config.ridge_lambda)
        s_pred.extend(panel_model.normalize_sizes(s_raw))
        r_pred.extend(np.clip(r_raw, *panel_model.RATIO_BOUNDS))
        s_true.extend(t.s_p for t in truths)
        r_true.extend(t.r_p for t in truths)
    report = {"rmse_s_p": rmse(s_pred, s_true), "rmse_r_p": rmse(r_pred, r_true), "rmse_u_g": None}
    Xe, ye = element_xy(train_records)
    Xt, yt = element_xy(test_records)
    if len(ye) and len(yt):
        u_pred = np.clip(ridge_baseline((Xe, ye), Xt, config.ridge_lambda), 0.1, 1.0)
        report["rmse_u_g"] = rmse(u_pred, yt)
    return report


def evaluate(bundle, test_samples, config=None, train_samples=None):
    """Score panel and element inference on annotated test posters.

    Elements are composed inside panels shaped like the annotated ones, so the
    element scores do not inherit panel-stage errors. With ``train_samples``
    the report also carries a ridge baseline fitted on them.
    """
    config = config or RunConfig()
    test_samples = list(test_samples)
    if not test_samples:
        raise ValueError("empty test set")
    records = _collect(test_samples, config)

    s_pred, s_true, r_pred, r_true = [], [], [], []
    u_pred, u_true, h_pred, h_true = [], [], [], []
    for poster_index, (sample, specs, truths) in enumerate(records):
        inferred = panel_model.infer(bundle.panel, specs)
        s_pred.extend(p.s_p for p in inferred)
        r_pred.extend(p.r_p for p in inferred)
        s_true.extend(t.s_p for t in truths)
        r_true.extend(t.r_p for t in truths)

        doc, ann = sample.doc, sample.annotation
        for panel_index, (spec, truth) in enumerate(zip(specs, truths)):
            placements = ann.placements_for(spec.section_id)
            if not placements:
                continue
            elements = [doc.element(pl.element_id) for pl in placements]
            comp = compose_elements(
                bundle,
                config,
                spec,
                truth_rect(truth.s_p, truth.r_p),
                elements,
                (doc.page_width, doc.page_height),
                seed=[config.seed, poster_index, panel_index],
                panel_index=panel_index,
                page_aspect=ann.aspect,
            )
            for got, want in zip(comp.placements, placements):
                u_pred.append(got.u_g)
                u_true.append(want.u_g)
                h_pred.append(got.hpos)
                h_true.append(want.hpos)

    ridge = _ridge_report(train_samples, records, config) if train_samples else None
    return EvalReport(
        rmse_s_p=rmse(s_pred, s_true),
        rmse_r_p=rmse(r_pred, r_true),
        rmse_u_g=rmse(u_pred, u_true) if u_true else None,
        accuracy_hpos=accuracy(h_pred, h_true) if h_true else None,
        n_panels=len(s_true),
        n_elements=len(u_true),
        ridge=ridge,
    )
