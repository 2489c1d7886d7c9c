# app/ml/sampling.py
"""Static and competence-aware sampling distributions over languages."""
import math
from typing import Iterable, Mapping, Optional, Union

import numpy as np

from app.models.sampling import CorpusSizes, SamplingWeights
from app.models.schedule import Weighting

# tau = INF reproduces uniform sampling exactly
INF = math.inf


def _support(support: Iterable[str]):
    codes = sorted(set(support))
    if not codes:
        raise ValueError("empty support")
    return codes


def _normalized(codes, raw: np.ndarray) -> SamplingWeights:
    return SamplingWeights(weights=dict(zip(codes, (raw / raw.sum()).tolist())))


def _sizes(sizes: Union[CorpusSizes, Mapping[str, int]]) -> CorpusSizes:
    return sizes if isinstance(sizes, CorpusSizes) else CorpusSizes(sizes=dict(sizes))


def uniform_weights(support: Iterable[str]) -> SamplingWeights:
    codes = _support(support)
    return SamplingWeights(weights={code: 1.0 / len(codes) for code in codes})


def proportional_weights(sizes: Union[CorpusSizes, Mapping[str, int]], support: Iterable[str]) -> SamplingWeights:
    codes = _support(support)
    covered = _sizes(sizes).covering(codes)
    raw = np.array([covered[code] for code in codes], dtype=float)
    return _normalized(codes, raw)


def temperature_weights(sizes: Union[CorpusSizes, Mapping[str, int]], support: Iterable[str],
                        tau: float) -> SamplingWeights:
    if isinstance(tau, str) and tau.lower() in ('inf', 'infinity'):
        tau = INF
    if tau is None or not tau > 0:
        raise ValueError(f"temperature must be positive, got {tau}")
    if math.isinf(tau):
        codes = _support(support)
        _sizes(sizes).covering(codes)
        return uniform_weights(codes)
    if tau == 1:
        return proportional_weights(sizes, support)

    proportions = proportional_weights(sizes, support)
    codes = proportions.codes
    return _normalized(codes, np.power(proportions.as_array(codes), 1.0 / tau))


def competence_weights(c: Mapping[str, float], support: Iterable[str]) -> SamplingWeights:
    """psi_i proportional to 1 / c_i: less competent languages are sampled more."""
    codes = _support(support)
    missing = [code for code in codes if code not in c]
    if missing:
        raise ValueError(f"no competence for {missing[0]}")
    values = np.array([c[code] for code in codes], dtype=float)
    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        raise ValueError("non-positive competence")
    return _normalized(codes, 1.0 / values)


def build_weights(weighting: Weighting, support: Iterable[str],
                  sizes: Optional[Union[CorpusSizes, Mapping[str, int]]] = None,
                  competence: Optional[Mapping[str, float]] = None,
                  tau: Optional[float] = None) -> SamplingWeights:
    weighting = Weighting(weighting)
    if weighting is Weighting.UNIFORM:
        return uniform_weights(support)
    if weighting is Weighting.COMPETENCE:
        if competence is None:
            raise ValueError("competence weighting needs competence values")
        return competence_weights(competence, support)
    if sizes is None:
        raise ValueError(f"{weighting.value} weighting needs corpus sizes")
    if weighting is Weighting.PROPORTIONAL:
        return proportional_weights(sizes, support)
    return temperature_weights(sizes, support, tau)


def make_rng(seed: Union[int, np.random.Generator, None]) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_language(w: SamplingWeights, rng: np.random.Generator) -> str:
    """Draw one language (one batch) according to ``w``."""
    codes = w.codes
    cumulative = np.cumsum(w.as_array(codes))
    index = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side='right'))
    return codes[min(index, len(codes) - 1)]
