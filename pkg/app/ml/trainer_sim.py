# app/ml/trainer_sim.py
"""Trainer contract plus a deterministic learning-curve simulator.

The simulator models every language's dev loss as a single exponential decay to a
floor, driven by the number of training samples the language has effectively
seen. LRLs also profit from HRL training along the graph edges:

    n_lrl = own_lrl + alpha * sum_h e(h, lrl) * own_h
    L(n)  = Lf + (L0 - Lf) * exp(-n / kappa)
"""
import json
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Optional, Protocol

import numpy as np

from app.ml.sampling import make_rng, sample_language
from app.models.competence import BenchmarkLoss
from app.models.language import BipartiteLangGraph
from app.models.sampling import SamplingWeights
from app.models.schedule import TrainerReport

logger = logging.getLogger(__name__)

ALLOCATIONS = ('expected', 'sampled')

# e-folds of training used by the bitext reference when no budget is given
BITEXT_EFOLDS = 40


class TrainerError(RuntimeError):
    pass


class Trainer(Protocol):
    def train_steps(self, weights: SamplingWeights, n: int) -> None:
        ...

    def eval_dev(self, sample_size: int, languages: Iterable[str]) -> TrainerReport:
        ...


@dataclass(frozen=True)
class CurveParams:
    initial_loss: float
    floor_loss: float
    rate: float
    corpus_size: int = 1
    dev_size: int = 1

    def __post_init__(self):
        if not self.floor_loss < self.initial_loss:
            raise ValueError(f"floor loss {self.floor_loss} must be below initial loss {self.initial_loss}")
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")
        if self.corpus_size < 1 or self.dev_size < 1:
            raise ValueError("corpus and dev sizes must be positive")

    def to_dict(self) -> Dict:
        return {
            'initial_loss': self.initial_loss,
            'floor_loss': self.floor_loss,
            'rate': self.rate,
            'corpus_size': self.corpus_size,
            'dev_size': self.dev_size
        }


@dataclass(frozen=True)
class LearningCurveParams:
    curves: Dict[str, CurveParams]
    transfer_coeff: float = 0.3
    noise_sigma: float = 0.0
    batch_size: int = 100
    allocation: str = 'expected'

    def __post_init__(self):
        if not self.curves:
            raise ValueError("no learning curves given")
        if not 0.0 <= self.transfer_coeff <= 1.0:
            raise ValueError(f"transfer coefficient must lie in [0, 1], got {self.transfer_coeff}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise sigma must be non-negative, got {self.noise_sigma}")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be positive, got {self.batch_size}")
        if self.allocation not in ALLOCATIONS:
            raise ValueError(f"unknown allocation: {self.allocation}")

    def curve(self, language: str) -> CurveParams:
        try:
            return self.curves[language]
        except KeyError:
            raise ValueError(f"no learning curve for {language}") from None

    @property
    def corpus_sizes(self) -> Dict[str, int]:
        return {code: self.curves[code].corpus_size for code in sorted(self.curves)}

    @property
    def dev_sizes(self) -> Dict[str, int]:
        return {code: self.curves[code].dev_size for code in sorted(self.curves)}

    def to_dict(self) -> Dict:
        return {
            'transfer_coeff': self.transfer_coeff,
            'noise_sigma': self.noise_sigma,
            'batch_size': self.batch_size,
            'allocation': self.allocation,
            'languages': {code: self.curves[code].to_dict() for code in sorted(self.curves)}
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'LearningCurveParams':
        curves = {code: CurveParams(**values) for code, values in data['languages'].items()}
        return cls(
            curves=curves,
            transfer_coeff=float(data.get('transfer_coeff', 0.3)),
            noise_sigma=float(data.get('noise_sigma', 0.0)),
            batch_size=int(data.get('batch_size', 100)),
            allocation=data.get('allocation', 'expected')
        )


@dataclass(frozen=True)
class Scenario:
    """A simulator setup: curves per language plus the fixtures it is tied to."""
    name: str
    graph: str
    benchmarks: str
    direction: str
    params: LearningCurveParams
    description: str = ''
    stats: Optional[str] = None

    def to_dict(self) -> Dict:
        data = {
            'schema_version': 1,
            'name': self.name,
            'description': self.description,
            'graph': self.graph,
            'benchmarks': self.benchmarks,
            'direction': self.direction,
            'stats': self.stats
        }
        data.update(self.params.to_dict())
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> 'Scenario':
        if data.get('schema_version') != 1:
            raise ValueError(f"unsupported scenario schema version: {data.get('schema_version')}")
        try:
            return cls(
                name=data['name'],
                graph=data['graph'],
                benchmarks=data['benchmarks'],
                direction=data.get('direction', 'xxx-eng'),
                params=LearningCurveParams.from_dict(data),
                description=data.get('description', ''),
                stats=data.get('stats')
            )
        except (KeyError, TypeError) as e:
            raise ValueError(f"scenario is missing field {e}") from e


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ValueError(f"cannot read scenario {path}: {e}") from e
    return Scenario.from_dict(data)


def curve_loss(curve: CurveParams, n: float) -> float:
    return curve.floor_loss + (curve.initial_loss - curve.floor_loss) * math.exp(-n / curve.rate)


def sim_loss(params: LearningCurveParams, language: str, effective_samples: float) -> float:
    return curve_loss(params.curve(language), effective_samples)


def effective_samples(graph: BipartiteLangGraph, own_samples: Mapping[str, float],
                      language: str, transfer_coeff: float) -> float:
    """Own samples, plus similarity-weighted HRL samples when ``language`` is an LRL."""
    own = own_samples.get(language, 0.0)
    if not graph.is_lrl(language) or transfer_coeff == 0:
        return own
    transferred = math.fsum(weight * own_samples.get(hrl, 0.0)
                            for hrl, weight in graph.edges_into(language).items())
    return own + transfer_coeff * transferred


class SimTrainer:
    def __init__(self, params: LearningCurveParams, graph: BipartiteLangGraph, seed: Optional[int] = 0):
        missing = [code for code in graph.languages if code not in params.curves]
        if missing:
            raise ValueError(f"no learning curve for {missing[0]}")
        self.params = params
        self.graph = graph
        self.rng = make_rng(seed)
        self.samples = {code: 0.0 for code in graph.languages}
        self.step = 0

    def train_steps(self, weights: SamplingWeights, n: int) -> None:
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ValueError(f"number of steps must be a positive integer, got {n}")
        unknown = [code for code in weights.codes if code not in self.samples]
        if unknown:
            raise TrainerError(f"cannot train unknown language: {unknown[0]}")

        batch = self.params.batch_size
        if self.params.allocation == 'expected':
            for code in weights.codes:
                self.samples[code] += n * batch * weights[code]
        else:
            for _ in range(n):
                self.samples[sample_language(weights, self.rng)] += batch
        self.step += n

    def effective_samples(self, language: str) -> float:
        return effective_samples(self.graph, self.samples, language, self.params.transfer_coeff)

    def current_loss(self, language: str) -> float:
        if language not in self.samples:
            raise TrainerError(f"unknown language: {language}")
        return sim_loss(self.params, language, self.effective_samples(language))

    def eval_dev(self, sample_size: int, languages: Iterable[str]) -> TrainerReport:
        if isinstance(sample_size, bool) or not isinstance(sample_size, int) or sample_size < 1:
            raise ValueError(f"sample size must be a positive integer, got {sample_size}")
        sigma = self.params.noise_sigma
        dev_loss = {}
        for code in sorted(languages):
            loss = self.current_loss(code)
            if sigma > 0:
                loss += float(self.rng.normal(0.0, sigma / math.sqrt(sample_size)))
            dev_loss[code] = loss
        return TrainerReport(step=self.step, dev_loss=dev_loss)


def run_bitext_benchmark(language: str, params: LearningCurveParams, budget: Optional[int] = None,
                         sample_size: int = 256, seed: Optional[int] = 0) -> BenchmarkLoss:
    """Simulated dev loss of a model trained on ``language`` alone for ``budget`` steps.

    The default budget covers BITEXT_EFOLDS e-folds of the curve, which puts the
    noiseless result within 1e-6 of the floor for any realistic loss gap.
    """
    curve = params.curve(language)
    if budget is None:
        budget = math.ceil(BITEXT_EFOLDS * curve.rate / params.batch_size)
    if budget < 1:
        raise ValueError(f"budget must be positive, got {budget}")
    loss = curve_loss(curve, budget * params.batch_size)
    if params.noise_sigma > 0:
        rng = np.random.default_rng(seed)
        loss += float(rng.normal(0.0, params.noise_sigma / math.sqrt(sample_size)))
    logger.debug(f"Bitext benchmark for {language}: {loss:.6f} after {budget} steps")
    return BenchmarkLoss(language=language, loss=max(loss, 0.0))
