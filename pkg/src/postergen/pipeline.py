"""Corpus loading, model training and poster generation end to end."""

from dataclasses import dataclass, field, replace
import json
import math
from pathlib import Path
import time

import numpy as np

from . import compose as compose_mod
from . import panel_model
from .compose import ComposeModel, calibrate_beta, element_area, fit_position_cpd, fit_size_cpd
from .config import RunConfig
from .corpus import CorpusError, derive_panel_specs, parse_annotation, parse_paper, select_elements
from .layout import UNIT_PAGE, Rect, arrange
from .panel_model import PanelModel, TrainingRow
from .summarize import summarize_paper

BUNDLE_VERSION = 1
PAPER_SUFFIX = ".paper.xml"
POSTER_SUFFIX = ".poster.xml"


@dataclass(frozen=True)
class PosterSample:
    """One paper with the annotation of its human-designed poster."""

    name: str
    doc: object
    annotation: object


@dataclass(frozen=True)
class ModelBundle:
    panel: PanelModel
    compose: ComposeModel
    beta: float

    def to_dict(self):
        return {
            "version": BUNDLE_VERSION,
            "panel_model": self.panel.to_dict(),
            "compose_model": self.compose.to_dict(),
            "beta": self.beta,
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("version") != BUNDLE_VERSION:
            raise ValueError(f"unsupported model bundle version {data.get('version')!r}")
        return cls(
            panel=PanelModel.from_dict(data["panel_model"]),
            compose=ComposeModel.from_dict(data["compose_model"]),
            beta=float(data["beta"]),
        )

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path):
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"model file not found: {path}")
        return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))


def load_corpus(corpus_dir):
    """Pair ``<name>.paper.xml`` with ``<name>.poster.xml`` files, sorted by name."""
    corpus_dir = Path(corpus_dir)
    if not corpus_dir.is_dir():
        raise CorpusError(f"corpus directory not found: {corpus_dir}")
    papers = {p.name[: -len(PAPER_SUFFIX)]: p for p in corpus_dir.glob("*" + PAPER_SUFFIX)}
    posters = {p.name[: -len(POSTER_SUFFIX)]: p for p in corpus_dir.glob("*" + POSTER_SUFFIX)}
    orphans = sorted(
        [str(papers[n]) for n in papers.keys() - posters.keys()]
        + [str(posters[n]) for n in posters.keys() - papers.keys()]
    )
    if orphans:
        raise CorpusError("unpaired corpus files: " + ", ".join(orphans))
    if not papers:
        raise CorpusError(f"no paper/poster pairs in {corpus_dir}")
    samples = []
    for name in sorted(papers):
        try:
            doc = parse_paper(papers[name].read_bytes())
            ann = parse_annotation(posters[name].read_bytes(), doc=doc)
        except CorpusError as exc:
            raise CorpusError(f"{name}: {exc}") from exc
        samples.append(PosterSample(name=name, doc=doc, annotation=ann))
    return samples


def trim_elements(doc, max_elements):
    if max_elements is None:
        return doc
    sections = tuple(replace(s, elements=select_elements(s, max_elements)) for s in doc.sections)
    return replace(doc, sections=sections)


def panel_inputs(doc, config):
    summaries = summarize_paper(doc, ratio=config.extraction_ratio)
    return summaries, derive_panel_specs(doc, summaries)


def truth_rect(s_p, r_p):
    """A panel rectangle with the given normalized area and aspect."""
    return Rect(0.0, 0.0, math.sqrt(s_p * r_p), math.sqrt(s_p / r_p))


@dataclass
class TrainingTables:
    panel_rows: list = field(default_factory=list)
    size_rows: list = field(default_factory=list)
    position_rows: list = field(default_factory=list)
    panel_areas: list = field(default_factory=list)
    text_ratios: list = field(default_factory=list)
    element_areas: list = field(default_factory=list)


def training_tables(samples, config):
    tables = TrainingTables()
    for sample in samples:
        doc, ann = sample.doc, sample.annotation
        _, specs = panel_inputs(doc, config)
        for spec in specs:
            try:
                truth = ann.panel(spec.section_id)
            except KeyError:
                raise CorpusError(f"{sample.name}: section {spec.section_id!r} has no annotated panel") from None
            tables.panel_rows.append(TrainingRow(spec.t_p, spec.n_p, spec.g_p, truth.s_p, truth.r_p))
            rect = truth_rect(truth.s_p, truth.r_p)
            occupied = 0.0
            for pl in ann.placements_for(spec.section_id):
                el = doc.element(pl.element_id)
                s_g = doc.element_size(el)
                tables.size_rows.append((truth.s_p, spec.l_p, s_g, pl.hpos_code, pl.u_g))
                tables.position_rows.append((truth.r_p, el.aspect, s_g, pl.hpos_code))
                occupied += float(element_area(pl.u_g, rect.w, el.aspect, ann.aspect))
            tables.panel_areas.append(truth.s_p)
            tables.text_ratios.append(spec.t_p)
            tables.element_areas.append(occupied)
    return tables


def train(samples, config=None):
    """Fit both networks; returns ``(bundle, diagnostics)``."""
    config = config or RunConfig()
    samples = list(samples)
    if not samples:
        raise CorpusError("cannot train on an empty corpus")
    diagnostics = {}
    start = time.perf_counter()
    tables = training_tables(samples, config)
    diagnostics["extract_seconds"] = time.perf_counter() - start

    start = time.perf_counter()
    pmodel = panel_model.fit(tables.panel_rows)
    diagnostics["panel_learn_seconds"] = time.perf_counter() - start
    diagnostics["panel_residual_variance"] = {"s_p": pmodel.sigma_s**2, "r_p": pmodel.sigma_r**2}

    start = time.perf_counter()
    w_u, sigma_u = fit_size_cpd(tables.size_rows)
    position = fit_position_cpd(tables.position_rows, return_estimator=True)
    beta = calibrate_beta(tables.panel_areas, tables.text_ratios, tables.element_areas)
    diagnostics["compose_learn_seconds"] = time.perf_counter() - start
    diagnostics["size_residual_variance"] = sigma_u**2
    diagnostics["irls_iterations"] = position.n_iter_
    diagnostics["beta"] = beta
    diagnostics["n_panels"] = len(tables.panel_rows)
    diagnostics["n_elements"] = len(tables.size_rows)

    cmodel = ComposeModel(w_h=position.coef_, w_u=w_u, sigma_u=sigma_u)
    return ModelBundle(panel=pmodel, compose=cmodel, beta=beta), diagnostics


@dataclass(frozen=True)
class GeneratedPoster:
    doc: object
    summaries: dict
    specs: tuple
    layout: object
    compositions: tuple
    timings: dict


def compose_elements(bundle, config, spec, rect, elements, paper_page, seed, panel_index=0, page_aspect=None):
    """Element placements for one panel under the configured inference mode."""
    page_aspect = config.body_aspect if page_aspect is None else page_aspect
    if config.element_inference == "mode" or not elements:
        placements = []
        for el in elements:
            s_g = el.relative_size(*paper_page)
            probs = compose_mod.predict_position(bundle.compose, rect.aspect, el.aspect, s_g)
            code = int(np.argmax(probs))
            u = float(compose_mod.size_mean(bundle.compose, rect.area, spec.l_p, s_g, code))
            placements.append(
                compose_mod.ElementPlacement(
                    element_id=el.id,
                    hpos=compose_mod.HPOS_VALUES[code],
                    u_g=float(np.clip(u, *compose_mod.U_BOUNDS)),
                    section_id=el.section_id,
                )
            )
        return compose_mod.PanelComposition(panel_index, tuple(placements), 0.0)
    return compose_mod.compose_panel(
        bundle.compose,
        config.constraint(bundle.beta),
        spec,
        rect,
        elements,
        n_samples=config.n_samples,
        seed=seed,
        panel_index=panel_index,
        paper_page=paper_page,
        page_aspect=page_aspect,
    )


def generate(doc, bundle, config=None):
    config = config or RunConfig()
    doc = trim_elements(doc, config.max_elements_per_panel)
    timings = {}

    start = time.perf_counter()
    summaries, specs = panel_inputs(doc, config)
    timings["text_extraction"] = time.perf_counter() - start

    start = time.perf_counter()
    specs = panel_model.infer(bundle.panel, specs, seed=config.seed, sample=config.sample_panels)
    timings["panel_infer"] = time.perf_counter() - start

    start = time.perf_counter()
    layout = arrange([(s.s_p, s.r_p) for s in specs], UNIT_PAGE, config.alpha)
    timings["panel_layout"] = time.perf_counter() - start

    start = time.perf_counter()
    paper_page = (doc.page_width, doc.page_height)
    compositions = tuple(
        compose_elements(
            bundle,
            config,
            spec,
            rect,
            section.elements,
            paper_page,
            seed=[config.seed, i],
            panel_index=i,
        )
        for i, (spec, rect, section) in enumerate(zip(specs, layout.rects, doc.sections))
    )
    timings["compose_infer"] = time.perf_counter() - start
    return GeneratedPoster(
        doc=doc,
        summaries=summaries,
        specs=tuple(specs),
        layout=layout,
        compositions=compositions,
        timings=timings,
    )
