"""Learnable scientific poster layout."""

from .compose import ComposeModel, FillConstraint, PositionClassifier, ElementSizeRegressor, compose_panel
from .config import RunConfig
from .corpus import PaperDoc, PosterAnnotation, parse_annotation, parse_paper
from .layout import Rect, arrange, realize
from .panel_model import PanelAttributeModel, PanelModel
from .pipeline import ModelBundle, generate, load_corpus, train

__version__ = "0.1.0"

__all__ = [
    "ComposeModel",
    "ElementSizeRegressor",
    "FillConstraint",
    "ModelBundle",
    "PanelAttributeModel",
    "PanelModel",
    "PaperDoc",
    "PositionClassifier",
    "PosterAnnotation",
    "Rect",
    "RunConfig",
    "arrange",
    "compose_panel",
    "generate",
    "load_corpus",
    "parse_annotation",
    "parse_paper",
    "realize",
    "train",
]
