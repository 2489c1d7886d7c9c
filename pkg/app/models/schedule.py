# app/models/schedule.py
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from app.models.competence import CompetenceState
from app.models.sampling import SamplingWeights


class CompetenceVariant(str, Enum):
    MAX = 'max'
    AVG = 'avg'


class Weighting(str, Enum):
    COMPETENCE = 'competence'
    UNIFORM = 'uniform'
    PROPORTIONAL = 'proportional'
    TEMPERATURE = 'temperature'


@dataclass(frozen=True)
class SchedulerConfig:
    threshold: float = 0.9
    eval_interval: int = 100
    dev_sample_size: int = 256
    competence_variant: CompetenceVariant = CompetenceVariant.AVG
    patience: int = 10
    fallback_after: Optional[int] = None
    max_steps: int = 20000
    seed: int = 7
    weighting: Weighting = Weighting.COMPETENCE
    temperature: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'competence_variant', CompetenceVariant(self.competence_variant))
        object.__setattr__(self, 'weighting', Weighting(self.weighting))
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in [0, 1], got {self.threshold}")
        for name in ('eval_interval', 'dev_sample_size', 'patience', 'max_steps'):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value}")
        if self.fallback_after is not None and (not isinstance(self.fallback_after, int) or self.fallback_after < 1):
            raise ValueError(f"fallback_after must be a positive integer, got {self.fallback_after}")

    @property
    def fallback_round(self) -> int:
        """Evaluation round at which leftover candidates are force-promoted."""
        if self.fallback_after is not None:
            return self.fallback_after
        return math.ceil(self.max_steps / self.eval_interval)

    def to_dict(self) -> Dict:
        return {
            'threshold': self.threshold,
            'eval_interval': self.eval_interval,
            'dev_sample_size': self.dev_sample_size,
            'competence_variant': self.competence_variant.value,
            'patience': self.patience,
            'fallback_after': self.fallback_after,
            'max_steps': self.max_steps,
            'seed': self.seed,
            'weighting': self.weighting.value,
            'temperature': self.temperature
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'SchedulerConfig':
        known = {key: value for key, value in data.items() if key in cls.__dataclass_fields__}
        return cls(**known)


@dataclass(frozen=True)
class TrainerReport:
    step: int
    dev_loss: Dict[str, float]

    def __post_init__(self):
        for code, loss in self.dev_loss.items():
            if not math.isfinite(loss):
                raise ValueError(f"invalid loss for {code}: {loss}")


@dataclass(frozen=True)
class EvaluationRecord:
    round: int
    step: int
    dev_loss: Dict[str, float]
    competence: Dict[str, float]
    hrl_competence: Dict[str, float]
    promoted: List[str]
    fallback: List[str]
    selected: List[str]
    candidate: List[str]
    weights: Dict[str, float]
    weighted_dev_loss: Optional[float] = None
    improved: bool = False

    def to_dict(self) -> Dict:
        return {
            'round': self.round,
            'step': self.step,
            'dev_loss': {code: self.dev_loss[code] for code in sorted(self.dev_loss)},
            'competence': {code: self.competence[code] for code in sorted(self.competence)},
            'hrl_competence': {code: self.hrl_competence[code] for code in sorted(self.hrl_competence)},
            'promoted': list(self.promoted),
            'fallback': list(self.fallback),
            'selected': sorted(self.selected),
            'candidate': sorted(self.candidate),
            'weights': {code: self.weights[code] for code in sorted(self.weights)},
            'weighted_dev_loss': self.weighted_dev_loss,
            'improved': self.improved
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'EvaluationRecord':
        return cls(**{name: data[name] for name in cls.__dataclass_fields__ if name in data})


@dataclass
class ScheduleTrace:
    records: List[EvaluationRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def final(self) -> Optional[EvaluationRecord]:
        return self.records[-1] if self.records else None

    def promotion_schedule(self) -> Dict[str, Dict]:
        """Language -> {'round', 'step', 'via'} for every promoted language."""
        schedule = {}
        for record in self.records:
            for code in record.promoted:
                schedule[code] = {'round': record.round, 'step': record.step, 'via': 'threshold'}
            for code in record.fallback:
                schedule[code] = {'round': record.round, 'step': record.step, 'via': 'fallback'}
        return {code: schedule[code] for code in sorted(schedule)}

    def exhaustion_step(self) -> Optional[int]:
        """Step at which the candidate set first became empty."""
        for record in self.records:
            if not record.candidate:
                return record.step
        return None

    def best_record(self) -> Optional[EvaluationRecord]:
        best = None
        for record in self.records:
            if record.weighted_dev_loss is None:
                continue
            if best is None or record.weighted_dev_loss < best.weighted_dev_loss:
                best = record
        return best

    def to_ndjson(self) -> str:
        return ''.join(json.dumps(record.to_dict()) + '\n' for record in self.records)

    @classmethod
    def from_ndjson(cls, text: str) -> 'ScheduleTrace':
        records = [EvaluationRecord.from_dict(json.loads(line))
                   for line in text.splitlines() if line.strip()]
        return cls(records=records)


@dataclass(frozen=True)
class SchedulerState:
    selected: Tuple[str, ...]
    candidate: Tuple[str, ...]
    weights: SamplingWeights
    step: int = 0
    eval_round: int = 0
    best_weighted_loss: float = math.inf
    best_round: Optional[int] = None
    rounds_since_best: int = 0
    fallback_fired: bool = False
    competence: Optional[CompetenceState] = None
    trace: Tuple[EvaluationRecord, ...] = ()

    def __post_init__(self):
        overlap = set(self.selected) & set(self.candidate)
        if overlap:
            raise ValueError(f"language both selected and candidate: {sorted(overlap)[0]}")
        if self.weights.support != frozenset(self.selected):
            raise ValueError("weights support must equal the selected set")

    @property
    def languages(self) -> List[str]:
        return sorted(self.selected + self.candidate)

    def to_trace(self) -> ScheduleTrace:
        return ScheduleTrace(records=list(self.trace))
