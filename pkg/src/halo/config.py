"""Pipeline configuration: decay/threshold hyperparameters and feature toggles."""

from __future__ import annotations

from dataclasses import dataclass, replace

FEATURES = ("keyword", "penalty", "type", "idf")

DEFAULT_GAMMA = 0.9
DEFAULT_RHO = 0.01


class ConfigError(ValueError):
    """Raised on invalid hyperparameters or config/trace incompatibility."""


@dataclass(frozen=True, slots=True)
class PipelineConfig:
    """Scoring configuration driving the ablation rows.

    gamma is the per-hop penalty decay, rho the candidate-probability
    threshold. The four toggles switch keyword weighting, penalty
    propagation, entity-type conditioning, and IDF reweighting.
    """

    gamma: float = DEFAULT_GAMMA
    rho: float = DEFAULT_RHO
    use_keywords: bool = True
    use_penalty: bool = True
    use_type: bool = True
    use_idf: bool = True

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma must lie in [0, 1] (got {self.gamma})")
        if not 0.0 <= self.rho < 1.0:
            raise ConfigError(f"rho must lie in [0, 1) (got {self.rho})")

    def disable(self, feature: str) -> "PipelineConfig":
        if feature not in FEATURES:
            raise ConfigError(f"unknown feature {feature!r}; expected one of {FEATURES}")
        key = {"keyword": "use_keywords", "penalty": "use_penalty", "type": "use_type", "idf": "use_idf"}
        return replace(self, **{key[feature]: False})

    def fingerprint(self) -> str:
        flags = "".join(
            name if on else "-"
            for name, on in zip("kpti", (self.use_keywords, self.use_penalty, self.use_type, self.use_idf))
        )
        return f"gamma={self.gamma!r};rho={self.rho!r};features={flags}"

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "rho": self.rho,
            "use_keywords": self.use_keywords,
            "use_penalty": self.use_penalty,
            "use_type": self.use_type,
            "use_idf": self.use_idf,
            "fingerprint": self.fingerprint(),
        }
