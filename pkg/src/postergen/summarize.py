"""TextRank sentence extraction for panel text."""

from dataclasses import dataclass
import math
import re
import warnings

import numpy as np

DAMPING = 0.85
TOL = 1e-4
MAX_ITER = 100
_LOG_FLOOR = 1e-6

_SENTENCE_END = re.compile(r"(?<=[.!?])\s+")
_TOKEN = re.compile(r"\w+")


def split_sentences(text):
    return [s.strip() for s in _SENTENCE_END.split(text.strip()) if s.strip()]


def tokenize(sentence):
    return _TOKEN.findall(sentence.lower())


@dataclass(frozen=True)
class SentenceGraph:
    sentences: tuple
    weights: np.ndarray
    damping: float = DAMPING

    def __len__(self):
        return len(self.sentences)


def similarity(tokens_a, tokens_b):
    """Shared distinct tokens over the log sentence lengths."""
    if not tokens_a or not tokens_b:
        return 0.0
    shared = len(set(tokens_a) & set(tokens_b))
    if shared == 0:
        return 0.0
    return shared / max(math.log(len(tokens_a)) + math.log(len(tokens_b)), _LOG_FLOOR)


def build_graph(sentences, damping=DAMPING):
    if not sentences:
        raise ValueError("need at least one sentence")
    if not 0 < damping < 1:
        raise ValueError("damping must lie in (0, 1)")
    tokens = tuple(tuple(tokenize(s)) for s in sentences)
    n = len(tokens)
    weights = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            weights[i, j] = weights[j, i] = similarity(tokens[i], tokens[j])
    return SentenceGraph(sentences=tokens, weights=weights, damping=damping)


def rank(graph, tol=TOL, max_iter=MAX_ITER):
    """Weighted PageRank scores as ``[(index, score), ...]``, best first.

    Ties are broken by ascending sentence index.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    W = np.asarray(graph.weights, dtype=np.float64)
    d = graph.damping
    out_strength = W.sum(axis=1)
    # column j of the transition matrix spreads node j's score along its edges
    with np.errstate(divide="ignore", invalid="ignore"):
        transition = np.where(out_strength[:, None] > 0, W / out_strength[:, None], 0.0).T

    scores = np.ones(len(W))
    for _ in range(max_iter):
        updated = (1 - d) + d * transition @ scores
        delta = np.max(np.abs(updated - scores))
        scores = updated
        if delta < tol:
            break
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return [(i, float(scores[i])) for i in order]


def n_selected(ratio, n_sentences):
    # guard against ceil(0.3 * 10) == 4 from float rounding
    return min(n_sentences, math.ceil(ratio * n_sentences - 1e-9))


def summarize_text(text, ratio, damping=DAMPING, tol=TOL, max_iter=MAX_ITER):
    sentences = split_sentences(text)
    if not sentences:
        return ""
    keep = n_selected(ratio, len(sentences))
    ranked = rank(build_graph(sentences, damping), tol=tol, max_iter=max_iter)
    chosen = sorted(i for i, _ in ranked[:keep])
    return " ".join(sentences[i] for i in chosen)


def extract(section, ratio=None, damping=DAMPING, tol=TOL, max_iter=MAX_ITER):
    """Summary of one section, sentences kept in their original order.

    ``ratio`` overrides the section's own extraction ratio.
    """
    ratio = section.extraction_ratio if ratio is None else ratio
    if not 0 < ratio <= 1:
        raise ValueError("extraction ratio must lie in (0, 1]")
    text = section.text
    if not text.strip():
        warnings.warn(f"section {section.id!r} has no text; its summary is empty", stacklevel=2)
        return ""
    return summarize_text(text, ratio, damping=damping, tol=tol, max_iter=max_iter)


def summarize_paper(doc, ratio=None, **kwargs):
    return {s.id: extract(s, ratio=ratio, **kwargs) for s in doc.sections}
