# app/models/competence.py
import math
from dataclasses import dataclass, field
from typing import Dict, Optional

DIRECTIONS = ('xxx-eng', 'eng-xxx')


@dataclass(frozen=True)
class BenchmarkLoss:
    """Dev loss of a converged bitext model (base 2)."""
    language: str
    loss: float
    direction: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.loss, (int, float)) or not math.isfinite(self.loss) or self.loss < 0:
            raise ValueError(f"invalid benchmark loss for {self.language}: {self.loss}")
        if self.direction is not None and self.direction not in DIRECTIONS:
            raise ValueError(f"unknown direction: {self.direction}")

    def to_dict(self) -> Dict:
        return {'language': self.language, 'direction': self.direction, 'loss': self.loss}


@dataclass(frozen=True)
class CompetenceState:
    losses: Dict[str, float]
    self_competence: Dict[str, float]
    hrl_competence: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            'losses': {code: self.losses[code] for code in sorted(self.losses)},
            'self_competence': {code: self.self_competence[code] for code in sorted(self.self_competence)},
            'hrl_competence': {code: self.hrl_competence[code] for code in sorted(self.hrl_competence)}
        }
