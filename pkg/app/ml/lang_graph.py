# app/ml/lang_graph.py
import json
import logging
from collections import Counter
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Sequence

from app.models.language import BipartiteLangGraph, LanguageId, Side, VocabProfile

logger = logging.getLogger(__name__)

DEFAULT_K = 1000

Tokenizer = Callable[[str], List[str]]


def whitespace_tokenizer(line: str) -> List[str]:
    return line.split()


def tokenize_lines(lines: Iterable[str], tokenizer: Tokenizer = whitespace_tokenizer) -> Iterator[str]:
    for line in lines:
        yield from tokenizer(line)


def extract_vocab_profile(tokens: Iterable[str], language: LanguageId, k: int = DEFAULT_K) -> VocabProfile:
    """Keep the k most frequent tokens; equal counts are ordered by token."""
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise ValueError("invalid k")

    counts = Counter(tokens)
    if not counts:
        raise ValueError("empty corpus")

    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))[:k]
    return VocabProfile(language=language, entries=tuple(ranked), k=k)


def similarity(p_i: VocabProfile, p_j: VocabProfile) -> float:
    if p_i.k != p_j.k:
        raise ValueError("profile size mismatch")
    # divides by k even when a profile is shorter than k
    return len(p_i.tokens & p_j.tokens) / p_i.k


def build_graph(hrls: Sequence[LanguageId], lrls: Sequence[LanguageId],
                profiles: Mapping[str, VocabProfile], name: str = None) -> BipartiteLangGraph:
    hrls = [LanguageId(lang.code, Side.HRL) if isinstance(lang, LanguageId) else LanguageId(lang, Side.HRL)
            for lang in hrls]
    lrls = [LanguageId(lang.code, Side.LRL) if isinstance(lang, LanguageId) else LanguageId(lang, Side.LRL)
            for lang in lrls]
    if not hrls or not lrls:
        raise ValueError("graph needs at least one HRL and one LRL")

    overlap = {lang.code for lang in hrls} & {lang.code for lang in lrls}
    if overlap:
        raise ValueError(f"language on both sides: {', '.join(sorted(overlap))}")

    for lang in hrls + lrls:
        if lang.code not in profiles:
            raise ValueError(f"missing profile: {lang.code}")

    edges = {}
    for hrl in hrls:
        for lrl in lrls:
            edges[(hrl.code, lrl.code)] = similarity(profiles[hrl.code], profiles[lrl.code])

    k = profiles[hrls[0].code].k
    graph = BipartiteLangGraph(hrls=tuple(hrls), lrls=tuple(lrls), edges=edges, k=k, name=name)
    logger.debug(f"Built graph with {len(hrls)} HRLs, {len(lrls)} LRLs, k={k}")
    return graph


def graph_from_dict(data: Dict) -> BipartiteLangGraph:
    if not isinstance(data, dict):
        raise ValueError("graph fixture must be a JSON object")
    try:
        hrl_codes = list(data['hrls'])
        lrl_codes = list(data['lrls'])
        records = list(data['edges'])
    except (KeyError, TypeError) as e:
        raise ValueError(f"graph fixture is missing field {e}") from e

    edges = {}
    for record in records:
        try:
            key = (record['hrl'], record['lrl'])
            weight = float(record['weight'])
        except (KeyError, TypeError, ValueError) as e:
            raise ValueError(f"malformed edge record {record!r}") from e
        if key in edges:
            raise ValueError(f"duplicate edge: {key[0]}->{key[1]}")
        edges[key] = weight

    return BipartiteLangGraph(
        hrls=tuple(LanguageId(code, Side.HRL) for code in hrl_codes),
        lrls=tuple(LanguageId(code, Side.LRL) for code in lrl_codes),
        edges=edges,
        k=data.get('k'),
        name=data.get('name')
    )


def load_graph_fixture(path: str) -> BipartiteLangGraph:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ValueError(f"cannot read graph fixture {path}: {e}") from e
    return graph_from_dict(data)
