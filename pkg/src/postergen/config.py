"""Run configuration shared by the pipeline and the command line."""

from dataclasses import asdict, dataclass, fields
import json
import os

from .compose import DEFAULT_SAMPLES, FillConstraint
from .layout import DEFAULT_ALPHA

CONFIG_ENV = "POSTERGEN_CONFIG"
ELEMENT_INFERENCE = ("map", "mode")


@dataclass(frozen=True)
class RunConfig:
    alpha: float = DEFAULT_ALPHA
    lambda1: float = 1.0
    lambda2: float = 1.0
    beta: float | str = "auto"
    rho: float = 0.05
    n_samples: int = DEFAULT_SAMPLES
    seed: int = 0
    # None keeps each section's own ratio from the paper XML
    extraction_ratio: float | None = None
    page_width: float = 841.0
    page_height: float = 1189.0
    header_fraction: float = 0.08
    max_elements_per_panel: int | None = None
    sample_panels: bool = False
    element_inference: str = "map"
    ridge_lambda: float = 1.0
    model_path: str | None = None
    corpus_dir: str | None = None
    output_dir: str | None = None
    theme_path: str | None = None

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.lambda1 < 0 or self.lambda2 < 0 or self.lambda1 + self.lambda2 <= 0:
            raise ValueError("lambda1 and lambda2 must be nonnegative and not both zero")
        if self.beta != "auto" and not (isinstance(self.beta, (int, float)) and self.beta > 0):
            raise ValueError("beta must be a positive number or 'auto'")
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if self.extraction_ratio is not None and not 0 < self.extraction_ratio <= 1:
            raise ValueError("extraction_ratio must lie in (0, 1]")
        if self.page_width <= 0 or self.page_height <= 0:
            raise ValueError("page dimensions must be positive")
        if not 0 <= self.header_fraction < 0.5:
            raise ValueError("header_fraction must lie in [0, 0.5)")
        if self.element_inference not in ELEMENT_INFERENCE:
            raise ValueError(f"element_inference must be one of {ELEMENT_INFERENCE}")
        if self.ridge_lambda < 0:
            raise ValueError("ridge_lambda must be nonnegative")

    @property
    def body_aspect(self):
        """Physical width over height of the area that holds the panels."""
        return self.page_width / (self.page_height * (1 - self.header_fraction))

    def constraint(self, fitted_beta):
        beta = fitted_beta if self.beta == "auto" else float(self.beta)
        return FillConstraint(lambda1=self.lambda1, lambda2=self.lambda2, beta=beta, rho=self.rho)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path=None, **overrides):
        """Defaults, then the JSON file (``path`` or ``$POSTERGEN_CONFIG``), then overrides."""
        path = path or os.environ.get(CONFIG_ENV)
        data = {}
        if path:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(data)
