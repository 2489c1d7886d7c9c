# app/models/sampling.py
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List

import numpy as np

NORMALIZATION_TOLERANCE = 1e-9


@dataclass(frozen=True)
class SamplingWeights:
    """Normalized distribution over the selected languages; keys are the support."""
    weights: Dict[str, float]

    def __post_init__(self):
        if not self.weights:
            raise ValueError("empty support")
        values = np.fromiter(self.weights.values(), dtype=float, count=len(self.weights))
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("sampling weights must be finite and non-negative")
        if abs(math.fsum(values) - 1.0) > NORMALIZATION_TOLERANCE:
            raise ValueError(f"sampling weights sum to {math.fsum(values)}, not 1")

    @property
    def support(self) -> frozenset:
        return frozenset(self.weights)

    @property
    def codes(self) -> List[str]:
        return sorted(self.weights)

    def __getitem__(self, code: str) -> float:
        return self.weights[code]

    def as_array(self, codes: Iterable[str] = None) -> np.ndarray:
        codes = self.codes if codes is None else list(codes)
        return np.array([self.weights[code] for code in codes], dtype=float)

    def to_dict(self) -> Dict[str, float]:
        return {code: self.weights[code] for code in self.codes}


@dataclass(frozen=True)
class CorpusSizes:
    """Training-pair counts per language."""
    sizes: Dict[str, int]

    def __post_init__(self):
        for code, size in self.sizes.items():
            if int(size) != size or size < 1:
                raise ValueError(f"corpus size for {code} must be a positive integer, got {size}")

    def __getitem__(self, code: str) -> int:
        return self.sizes[code]

    def covering(self, support: Iterable[str]) -> Dict[str, int]:
        missing = [code for code in sorted(support) if code not in self.sizes]
        if missing:
            raise ValueError(f"missing corpus size: {missing[0]}")
        return {code: int(self.sizes[code]) for code in sorted(support)}

    def to_dict(self) -> Dict[str, int]:
        return {code: int(self.sizes[code]) for code in sorted(self.sizes)}
