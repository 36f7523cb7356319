"""Resolved run configuration shared by every CLI command."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from microasm.errors import ConfigError


@dataclass
class Config:
    alpha: float = 0.1
    gamma: float = 1.0
    delta: float = 0.1
    beta_base: float = 0.01
    beta_seed: float = 0.1
    clusters: int = 500
    topics: int = 15
    sentiments: int = 2
    iterations: int = 1500
    burn_in: int = 1000
    seed: int = 0
    strict_cluster_formula: bool = False
    point_estimate: bool = False
    chains: int = 1
    window: int = 5
    negation_window: int = 5
    rating_threshold: float = 3.0
    stopwords_path: str | None = None
    negators_path: str | None = None
    lexicon: str | list[str] | None = None
    paths: dict = field(default_factory=dict)
    verbosity: str = "WARNING"

    def validate(self) -> None:
        if self.beta_base <= 0 or self.beta_seed <= 0:
            raise ConfigError("beta masses must be > 0")
        if self.chains < 1:
            raise ConfigError("chains must be >= 1")
        if self.window < 1 or self.negation_window < 1:
            raise ConfigError("windows must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)
