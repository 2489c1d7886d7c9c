# app/models/experiment.py
import math
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Tuple

from app.models.schedule import CompetenceVariant, SchedulerConfig, Weighting

SCHEMA_VERSION = 1
BENCHMARK_SOURCES = ('fixture', 'simulated')
RESERVED_SAMPLERS = ('MULTIDDS_S',)

_SAMPLER_WITH_TAU = re.compile(r'^\s*TEMPERATURE\s*\(\s*([^)]+?)\s*\)\s*$', re.IGNORECASE)


class SamplerKind(str, Enum):
    UNIFORM = 'UNIFORM'
    PROPORTIONAL = 'PROPORTIONAL'
    TEMPERATURE = 'TEMPERATURE'
    CCLM_MAX = 'CCLM_MAX'
    CCLM_AVG = 'CCLM_AVG'

    @property
    def is_curriculum(self) -> bool:
        return self in (SamplerKind.CCLM_MAX, SamplerKind.CCLM_AVG)

    @property
    def variant(self) -> Optional[CompetenceVariant]:
        if self is SamplerKind.CCLM_MAX:
            return CompetenceVariant.MAX
        if self is SamplerKind.CCLM_AVG:
            return CompetenceVariant.AVG
        return None

    @classmethod
    def parse(cls, value: str) -> Tuple['SamplerKind', Optional[float]]:
        """Read 'CCLM_AVG', 'temperature' or 'TEMPERATURE(5)'; returns (kind, tau)"""
        if isinstance(value, SamplerKind):
            return value, None
        match = _SAMPLER_WITH_TAU.match(value or '')
        if match:
            return cls.TEMPERATURE, parse_temperature(match.group(1))
        name = (value or '').strip().upper()
        if name in RESERVED_SAMPLERS:
            raise ValueError(f"sampler {name} is reserved and cannot be run")
        try:
            return cls(name), None
        except ValueError:
            raise ValueError(f"unknown sampler: {value}") from None


def parse_temperature(value) -> float:
    if isinstance(value, str) and value.strip().lower() in ('inf', 'infinity'):
        return math.inf
    try:
        tau = float(value)
    except (TypeError, ValueError):
        raise ValueError(f"invalid temperature: {value}") from None
    if not tau > 0:
        raise ValueError(f"temperature must be positive, got {value}")
    return tau


def _temperature_to_json(tau: Optional[float]):
    if tau is not None and math.isinf(tau):
        return 'inf'
    return tau


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a scenario, a sampler and the scheduler settings, repeated over seeds."""
    name: str
    scenario: str
    sampler: SamplerKind = SamplerKind.CCLM_AVG
    scheduler: SchedulerConfig = field(default_factory=SchedulerConfig)
    temperature: Optional[float] = None
    graph: Optional[str] = None
    corpora: Optional[Dict[str, Dict[str, str]]] = None
    k: Optional[int] = None
    benchmarks: str = 'fixture'
    seeds: Tuple[int, ...] = (7, 8, 9)
    output_dir: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, 'sampler', SamplerKind.parse(self.sampler)[0])
        object.__setattr__(self, 'seeds', tuple(int(seed) for seed in self.seeds))
        if not self.name or not self.scenario:
            raise ValueError("experiment needs a name and a scenario")
        if not self.seeds:
            raise ValueError("experiment needs at least one seed")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("duplicate seed")
        if self.benchmarks not in BENCHMARK_SOURCES:
            raise ValueError(f"unknown benchmark source: {self.benchmarks}")
        if self.graph is not None and self.corpora is not None:
            raise ValueError("give either a graph fixture or corpora, not both")
        if self.corpora is not None:
            if set(self.corpora) != {'hrls', 'lrls'}:
                raise ValueError("corpora must list 'hrls' and 'lrls'")
            if self.k is not None and (not isinstance(self.k, int) or self.k < 1):
                raise ValueError("invalid k")

        weighting = self.scheduler.weighting
        if not self.sampler.is_curriculum and weighting is not Weighting.COMPETENCE:
            raise ValueError(f"weighting {weighting.value} only applies to CCLM samplers")
        needs_tau = self.sampler is SamplerKind.TEMPERATURE or weighting is Weighting.TEMPERATURE
        if needs_tau and self.temperature is None:
            raise ValueError("temperature sampling needs tau")
        if not needs_tau and self.temperature is not None:
            raise ValueError("tau is only allowed with temperature sampling")
        if self.temperature is not None:
            object.__setattr__(self, 'temperature', parse_temperature(self.temperature))

    def scheduler_config(self, seed: int) -> SchedulerConfig:
        """Scheduler settings for one seed, with the sampler's variant and tau filled in"""
        variant = self.sampler.variant or self.scheduler.competence_variant
        tau = self.temperature if self.scheduler.weighting is Weighting.TEMPERATURE else None
        return replace(self.scheduler, seed=seed, competence_variant=variant, temperature=tau)

    def with_overrides(self, **overrides) -> 'ExperimentConfig':
        """Apply non-None overrides; scheduler fields are routed to the scheduler config"""
        overrides = {key: value for key, value in overrides.items() if value is not None}
        scheduler_fields = {key: overrides.pop(key) for key in list(overrides)
                            if key in SchedulerConfig.__dataclass_fields__}
        if 'sampler' in overrides:
            sampler, tau = SamplerKind.parse(overrides['sampler'])
            overrides['sampler'] = sampler
            if tau is not None:
                overrides.setdefault('temperature', tau)
            if sampler is not SamplerKind.TEMPERATURE and 'temperature' not in overrides \
                    and scheduler_fields.get('weighting', self.scheduler.weighting) != Weighting.TEMPERATURE:
                overrides['temperature'] = None
        if 'seeds' in overrides:
            overrides['seeds'] = tuple(overrides['seeds'])
        scheduler = replace(self.scheduler, **scheduler_fields) if scheduler_fields else self.scheduler
        return replace(self, scheduler=scheduler, **overrides)

    def to_dict(self) -> Dict:
        scheduler = self.scheduler.to_dict()
        scheduler.pop('seed')
        scheduler.pop('temperature')
        return {
            'schema_version': SCHEMA_VERSION,
            'name': self.name,
            'scenario': self.scenario,
            'sampler': self.sampler.value,
            'temperature': _temperature_to_json(self.temperature),
            'graph': self.graph,
            'corpora': self.corpora,
            'k': self.k,
            'benchmarks': self.benchmarks,
            'seeds': list(self.seeds),
            'scheduler': scheduler
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'ExperimentConfig':
        if not isinstance(data, dict):
            raise ValueError("experiment config must be a JSON object")
        if data.get('schema_version') != SCHEMA_VERSION:
            raise ValueError(f"unsupported experiment schema version: {data.get('schema_version')}")
        sampler, tau = SamplerKind.parse(data.get('sampler', SamplerKind.CCLM_AVG.value))
        temperature = data.get('temperature')
        if temperature is None:
            temperature = tau
        try:
            return cls(
                name=data['name'],
                scenario=data['scenario'],
                sampler=sampler,
                scheduler=SchedulerConfig.from_dict(data.get('scheduler', {})),
                temperature=temperature,
                graph=data.get('graph'),
                corpora=data.get('corpora'),
                k=data.get('k'),
                benchmarks=data.get('benchmarks', 'fixture'),
                seeds=tuple(data.get('seeds', (7, 8, 9))),
                output_dir=data.get('output_dir')
            )
        except (KeyError, TypeError) as e:
            raise ValueError(f"experiment config is missing field {e}") from e


@dataclass
class RunReport:
    """Outcome of one seed of an experiment"""
    seed: int
    steps: int
    final_weighted_dev_loss: float
    final_losses: Dict[str, float]
    final_competence: Dict[str, float]
    final_weights: Dict[str, float]
    promotion_schedule: Dict[str, Dict]
    exhaustion_step: Optional[int]
    best_round: Optional[int]
    best_weighted_dev_loss: Optional[float]
    lrl_mean: float
    hrl_mean: float
    rounds: int

    def to_dict(self) -> Dict:
        return {
            'seed': self.seed,
            'steps': self.steps,
            'rounds': self.rounds,
            'final_weighted_dev_loss': self.final_weighted_dev_loss,
            'lrl_mean': self.lrl_mean,
            'hrl_mean': self.hrl_mean,
            'final_losses': {code: self.final_losses[code] for code in sorted(self.final_losses)},
            'final_competence': {code: self.final_competence[code] for code in sorted(self.final_competence)},
            'final_weights': {code: self.final_weights[code] for code in sorted(self.final_weights)},
            'promotion_schedule': self.promotion_schedule,
            'exhaustion_step': self.exhaustion_step,
            'best_round': self.best_round,
            'best_weighted_dev_loss': self.best_weighted_dev_loss
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'RunReport':
        return cls(**{name: data[name] for name in cls.__dataclass_fields__})


@dataclass
class ExperimentReport:
    """Every seed of one experiment plus the config echo that reproduces it"""
    config: Dict
    scenario: str
    sampler: str
    hrls: List[str]
    lrls: List[str]
    runs: List[RunReport] = field(default_factory=list)

    def mean(self, key: str) -> float:
        return math.fsum(getattr(run, key) for run in self.runs) / len(self.runs)

    def mean_losses(self) -> Dict[str, float]:
        codes = sorted(self.hrls + self.lrls)
        return {code: math.fsum(run.final_losses[code] for run in self.runs) / len(self.runs)
                for code in codes}

    def to_dict(self) -> Dict:
        return {
            'schema_version': SCHEMA_VERSION,
            'scenario': self.scenario,
            'sampler': self.sampler,
            'hrls': list(self.hrls),
            'lrls': list(self.lrls),
            'config': self.config,
            'runs': [run.to_dict() for run in self.runs],
            'mean': {
                'final_weighted_dev_loss': self.mean('final_weighted_dev_loss'),
                'lrl_mean': self.mean('lrl_mean'),
                'hrl_mean': self.mean('hrl_mean'),
                'final_losses': self.mean_losses()
            }
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'ExperimentReport':
        if data.get('schema_version') != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema version: {data.get('schema_version')}")
        try:
            return cls(
                config=data['config'],
                scenario=data['scenario'],
                sampler=data['sampler'],
                hrls=list(data['hrls']),
                lrls=list(data['lrls']),
                runs=[RunReport.from_dict(run) for run in data['runs']]
            )
        except (KeyError, TypeError) as e:
            raise ValueError(f"run report is missing field {e}") from e
