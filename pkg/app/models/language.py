# app/models/language.py
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple


class Side(str, Enum):
    HRL = 'HRL'
    LRL = 'LRL'


@dataclass(frozen=True)
class LanguageId:
    code: str
    side: Side

    def __post_init__(self):
        if not self.code or not self.code.strip():
            raise ValueError("language code must be non-empty")
        object.__setattr__(self, 'side', Side(self.side))

    def to_dict(self) -> Dict:
        return {'code': self.code, 'side': self.side.value}

    @classmethod
    def from_dict(cls, data: Dict) -> 'LanguageId':
        return cls(code=data['code'], side=Side(data['side']))


@dataclass(frozen=True)
class VocabProfile:
    """Top-k token counts of one language's corpus, most frequent first."""
    language: LanguageId
    entries: Tuple[Tuple[str, int], ...]
    k: int

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise ValueError("invalid k")
        if len(self.entries) > self.k:
            raise ValueError(f"profile for {self.language.code} holds more than k={self.k} entries")
        previous = None
        for token, count in self.entries:
            if count < 1:
                raise ValueError(f"non-positive count for token {token!r}")
            if previous is not None and (-count, token) < previous:
                raise ValueError("profile entries must be sorted by (count desc, token)")
            previous = (-count, token)

    @property
    def tokens(self) -> frozenset:
        return frozenset(token for token, _ in self.entries)

    def to_dict(self) -> Dict:
        return {
            'language': self.language.to_dict(),
            'k': self.k,
            'entries': [[token, count] for token, count in self.entries]
        }


@dataclass(frozen=True)
class BipartiteLangGraph:
    """Directed HRL -> LRL similarity graph.

    Edges are keyed by ``(hrl_code, lrl_code)``. Vertex order follows construction
    order so printed matrices keep the layout of the input.
    """
    hrls: Tuple[LanguageId, ...]
    lrls: Tuple[LanguageId, ...]
    edges: Dict[Tuple[str, str], float] = field(compare=True)
    k: Optional[int] = None
    name: Optional[str] = None

    def __post_init__(self):
        if not self.hrls or not self.lrls:
            raise ValueError("graph needs at least one HRL and one LRL")
        hrl_codes = [lang.code for lang in self.hrls]
        lrl_codes = [lang.code for lang in self.lrls]
        if len(set(hrl_codes)) != len(hrl_codes) or len(set(lrl_codes)) != len(lrl_codes):
            raise ValueError("duplicate language code in graph")
        overlap = set(hrl_codes) & set(lrl_codes)
        if overlap:
            raise ValueError(f"language on both sides: {', '.join(sorted(overlap))}")
        for lang in self.hrls:
            if lang.side is not Side.HRL:
                raise ValueError(f"{lang.code} is listed as HRL but marked {lang.side.value}")
        for lang in self.lrls:
            if lang.side is not Side.LRL:
                raise ValueError(f"{lang.code} is listed as LRL but marked {lang.side.value}")

        expected = {(h, l) for h in hrl_codes for l in lrl_codes}
        extra = set(self.edges) - expected
        if extra:
            hrl, lrl = sorted(extra)[0]
            raise ValueError(f"edge outside HRL x LRL: {hrl}->{lrl}")
        missing = expected - set(self.edges)
        if missing:
            hrl, lrl = sorted(missing)[0]
            raise ValueError(f"non-total edge map: missing {hrl}->{lrl}")
        for (hrl, lrl), weight in self.edges.items():
            if not 0.0 <= weight <= 1.0:
                raise ValueError(f"edge weight outside [0, 1]: {hrl}->{lrl} = {weight}")
            if self.k is not None and abs(weight * self.k - round(weight * self.k)) > 1e-9:
                raise ValueError(f"edge weight {hrl}->{lrl} = {weight} is not a multiple of 1/{self.k}")

    @property
    def hrl_codes(self) -> List[str]:
        return [lang.code for lang in self.hrls]

    @property
    def lrl_codes(self) -> List[str]:
        return [lang.code for lang in self.lrls]

    @property
    def languages(self) -> List[str]:
        return self.hrl_codes + self.lrl_codes

    def language(self, code: str) -> LanguageId:
        for lang in self.hrls + self.lrls:
            if lang.code == code:
                return lang
        raise ValueError(f"unknown language: {code}")

    def side_of(self, code: str) -> Side:
        return self.language(code).side

    def is_lrl(self, code: str) -> bool:
        return code in self.lrl_codes

    def weight(self, hrl: str, lrl: str) -> float:
        try:
            return self.edges[(hrl, lrl)]
        except KeyError:
            raise ValueError(f"no edge {hrl}->{lrl}") from None

    def edges_into(self, lrl: str) -> Dict[str, float]:
        """Edge weights from every HRL into ``lrl``."""
        if lrl not in self.lrl_codes:
            raise ValueError(f"unknown LRL: {lrl}")
        return {hrl: self.edges[(hrl, lrl)] for hrl in self.hrl_codes}

    def to_dict(self) -> Dict:
        return {
            'schema_version': 1,
            'name': self.name,
            'k': self.k,
            'hrls': self.hrl_codes,
            'lrls': self.lrl_codes,
            'edges': [
                {'hrl': hrl, 'lrl': lrl, 'weight': self.edges[(hrl, lrl)]}
                for hrl in self.hrl_codes for lrl in self.lrl_codes
            ]
        }
