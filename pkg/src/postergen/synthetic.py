"""Synthetic paper/poster pairs drawn from known network parameters."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .compose import HPOS_VALUES
from .config import RunConfig
from .corpus import (
    ElementPlacement,
    GraphicalElement,
    PanelSpec,
    PaperDoc,
    PosterAnnotation,
    Section,
    annotation_to_xml,
    paper_to_xml,
)
from .panel_model import normalize_sizes
from .pipeline import PAPER_SUFFIX, POSTER_SUFFIX, PosterSample, panel_inputs

_WORDS = (
    "model layout panel poster figure table network sample inference data paper method "
    "result design graph weight size ratio text section learning training error space "
    "aspect region split tree loss symmetric column readable aesthetic informative user "
    "study content element position width height gaussian linear softmax estimate "
    "prior evidence score baseline regression dataset benchmark annotation metric"
).split()


@dataclass(frozen=True)
class TrueParameters:
    w_s: tuple = (0.6, 0.0, 0.4, 0.0)
    w_r: tuple = (1.5, 0.15, 0.8, 0.5)
    w_h: tuple = (
        (1.5, -12.0, 0.0, 9.75),
        (0.0, 9.0, 24.0, -18.0),
        (0.0, 0.0, 0.0, 0.0),
    )
    w_u: tuple = (0.5, 0.0002, 1.0, 0.05, 0.15)


def _sentence(rng):
    words = rng.choice(_WORDS, size=int(rng.integers(6, 15)))
    text = " ".join(words)
    return text[0].upper() + text[1:] + "."


def random_paper(rng, name, n_sections=None, extraction_ratio=0.5, page=(8.5, 11.0)):
    n_sections = int(rng.integers(3, 7)) if n_sections is None else n_sections
    sections = []
    for k in range(n_sections):
        sid = f"s{k}"
        paragraphs = tuple(
            " ".join(_sentence(rng) for _ in range(int(rng.integers(2, 6))))
            for _ in range(int(rng.integers(1, 4)))
        )
        n_el = int(rng.choice([0, 0, 1, 1, 2]))
        elements = tuple(
            GraphicalElement(
                id=f"{sid}f{j}",
                native_width=float(rng.uniform(1.5, 6.5)),
                native_height=float(rng.uniform(1.5, 5.0)),
                kind="figure" if rng.random() < 0.7 else "table",
                caption=_sentence(rng),
                importance_rank=j + 1,
                section_id=sid,
            )
            for j in range(n_el)
        )
        sections.append(
            Section(
                id=sid,
                title=f"Section {k + 1}",
                order_index=k,
                paragraphs=paragraphs,
                elements=elements,
                extraction_ratio=extraction_ratio,
            )
        )
    if not any(s.elements for s in sections):
        s = sections[0]
        el = GraphicalElement(id=f"{s.id}f0", native_width=4.0, native_height=3.0, section_id=s.id, caption="Overview.")
        sections[0] = Section(s.id, s.title, s.order_index, s.paragraphs, (el,), s.extraction_ratio)
    return PaperDoc(
        title=f"Synthetic paper {name}",
        authors="A. Author, B. Author",
        sections=tuple(sections),
        page_width=page[0],
        page_height=page[1],
    )


def _annotate(rng, name, doc, params, config, sigma_s, sigma_r, sigma_u, stochastic_hpos, poster_size):
    _, specs = panel_inputs(doc, config)
    X = np.array([[*spec.features, 1.0] for spec in specs])
    s_raw = X @ np.asarray(params.w_s) + sigma_s * rng.standard_normal(len(specs))
    r_raw = X @ np.asarray(params.w_r) + sigma_r * rng.standard_normal(len(specs))
    sizes = normalize_sizes(s_raw)
    ratios = np.clip(r_raw, 0.2, 5.0)
    panels = tuple(PanelSpec(section_id=spec.section_id, s_p=float(s), r_p=float(r)) for spec, s, r in zip(specs, sizes, ratios))

    w_h = np.asarray(params.w_h)
    placements = []
    for spec, panel in zip(specs, panels):
        section = doc.section(spec.section_id)
        for el in section.elements:
            s_g = doc.element_size(el)
            logits = w_h @ np.array([panel.r_p, el.aspect, s_g, 1.0])
            if stochastic_hpos:
                p = np.exp(logits - logits.max())
                code = int(rng.choice(3, p=p / p.sum()))
            else:
                code = int(np.argmax(logits))
            mean = float(np.dot(params.w_u, [panel.s_p, spec.l_p, s_g, code, 1.0]))
            u = float(np.clip(mean + sigma_u * rng.standard_normal(), 0.1, 1.0))
            placements.append(ElementPlacement(el.id, HPOS_VALUES[code], u, section_id=section.id))
    return PosterAnnotation(
        poster_id=name,
        panels=panels,
        placements=tuple(placements),
        poster_width=poster_size[0],
        poster_height=poster_size[1],
    )


def _clear_margin(doc, params, config):
    """True when every element's best position beats the runner-up by at least 0.5
    and its mean width fraction stays inside the clamp range."""
    _, specs = panel_inputs(doc, config)
    X = np.array([[*spec.features, 1.0] for spec in specs])
    sizes = normalize_sizes(X @ np.asarray(params.w_s))
    ratios = np.clip(X @ np.asarray(params.w_r), 0.2, 5.0)
    w_h = np.asarray(params.w_h)
    for spec, s_p, r_p in zip(specs, sizes, ratios):
        for el in doc.section(spec.section_id).elements:
            s_g = doc.element_size(el)
            logits = w_h @ np.array([r_p, el.aspect, s_g, 1.0])
            top2 = np.sort(logits)[-2:]
            if top2[1] - top2[0] < 0.5:
                return False
            u = float(np.dot(params.w_u, [s_p, spec.l_p, s_g, int(np.argmax(logits)), 1.0]))
            if not 0.1 <= u <= 1.0:
                return False
    return True


def generate_corpus(
    n_posters,
    seed=0,
    sigma_s=0.0,
    sigma_r=0.0,
    sigma_u=0.0,
    stochastic_hpos=False,
    params=None,
    config=None,
    poster_size=(841.0, 1189.0),
):
    """``n_posters`` samples named ``syn000``, ``syn001``, ...

    With all noise levels at zero and deterministic positions the annotations
    are exact functions of the paper content, and papers whose elements sit
    close to a position boundary are redrawn.
    """
    params = params or TrueParameters()
    config = config or RunConfig()
    rng = np.random.default_rng(seed)
    noiseless = sigma_s == sigma_r == sigma_u == 0 and not stochastic_hpos
    samples = []
    for i in range(n_posters):
        name = f"syn{i:03d}"
        doc = random_paper(rng, name)
        while noiseless and not _clear_margin(doc, params, config):
            doc = random_paper(rng, name)
        ann = _annotate(rng, name, doc, params, config, sigma_s, sigma_r, sigma_u, stochastic_hpos, poster_size)
        samples.append(PosterSample(name=name, doc=doc, annotation=ann))
    return samples


def write_corpus(samples, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for sample in samples:
        (directory / (sample.name + PAPER_SUFFIX)).write_bytes(paper_to_xml(sample.doc))
        (directory / (sample.name + POSTER_SUFFIX)).write_bytes(annotation_to_xml(sample.annotation))
    return directory
