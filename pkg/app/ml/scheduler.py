# app/ml/scheduler.py
"""Competence-based curriculum scheduler.

HRLs start in the selected set with uniform weights, LRLs wait as candidates.
Each evaluation round recomputes every language's self-evaluated competence,
promotes candidates whose HRL-evaluated competence reaches the threshold and
reweights the selected set. Leftover candidates are force-promoted once the
fallback round is reached or the run is about to stop.
"""
import logging
import math
from dataclasses import replace
from typing import List, Mapping, Optional, Tuple, Union

from app.ml.competence import evaluate_competence
from app.ml.sampling import build_weights, uniform_weights
from app.ml.trainer_sim import Trainer, TrainerError
from app.models.competence import BenchmarkLoss
from app.models.language import BipartiteLangGraph
from app.models.sampling import CorpusSizes, SamplingWeights
from app.models.schedule import (EvaluationRecord, ScheduleTrace, SchedulerConfig,
                                 SchedulerState, TrainerReport, Weighting)

logger = logging.getLogger(__name__)

Losses = Union[TrainerReport, Mapping[str, float]]


def _dev_losses(losses: Losses) -> Mapping[str, float]:
    return losses.dev_loss if isinstance(losses, TrainerReport) else losses


def weighted_dev_loss(losses: Losses, dev_sizes: Mapping[str, int]) -> float:
    """Dev-size weighted mean of per-language dev losses."""
    dev_loss = _dev_losses(losses)
    if not dev_loss:
        raise ValueError("no losses to average")
    missing = [code for code in sorted(dev_loss) if code not in dev_sizes]
    if missing:
        raise ValueError(f"no dev size: {missing[0]}")
    total = math.fsum(dev_sizes[code] for code in dev_loss)
    return math.fsum(dev_sizes[code] * loss for code, loss in dev_loss.items()) / total


def _cold_start_weights(selected, config: SchedulerConfig, corpus_sizes) -> SamplingWeights:
    if config.weighting is Weighting.COMPETENCE:
        return uniform_weights(selected)
    return build_weights(config.weighting, selected, sizes=corpus_sizes, tau=config.temperature)


def _refresh_weights(selected, competence: Optional[Mapping[str, float]], config: Optional[SchedulerConfig],
                     corpus_sizes) -> SamplingWeights:
    weighting = config.weighting if config is not None else Weighting.COMPETENCE
    if weighting is Weighting.COMPETENCE and competence is None:
        return uniform_weights(selected)
    return build_weights(weighting, selected, sizes=corpus_sizes, competence=competence,
                         tau=config.temperature if config is not None else None)


def init(config: SchedulerConfig, graph: BipartiteLangGraph, benchmarks: Mapping[str, BenchmarkLoss],
         corpus_sizes: Optional[Union[CorpusSizes, Mapping[str, int]]] = None) -> SchedulerState:
    for code in graph.languages:
        if code not in benchmarks:
            raise ValueError(f"no benchmark: {code}")
    selected = tuple(sorted(graph.hrl_codes))
    return SchedulerState(
        selected=selected,
        candidate=tuple(sorted(graph.lrl_codes)),
        weights=_cold_start_weights(selected, config, corpus_sizes)
    )


def on_evaluation(state: SchedulerState, losses: Losses, graph: BipartiteLangGraph,
                  benchmarks: Mapping[str, BenchmarkLoss], config: SchedulerConfig,
                  dev_sizes: Optional[Mapping[str, int]] = None,
                  corpus_sizes: Optional[Union[CorpusSizes, Mapping[str, int]]] = None
                  ) -> Tuple[SchedulerState, List[str]]:
    """One evaluation round: update competence, promote, reweight, record."""
    dev_loss = _dev_losses(losses)
    missing = [code for code in state.languages if code not in dev_loss]
    if missing:
        raise ValueError(f"report missing language: {missing[0]}")
    dev_loss = {code: dev_loss[code] for code in state.languages}

    competence = evaluate_competence(graph, dev_loss, benchmarks, config.competence_variant,
                                     lrls=state.candidate)
    promotions = [code for code in state.candidate
                  if competence.hrl_competence[code] >= config.threshold]
    selected = tuple(sorted(state.selected + tuple(promotions)))
    candidate = tuple(code for code in state.candidate if code not in promotions)

    round_index = state.eval_round
    if round_index == 0 and state.step == 0:
        # before any training the cold-start weights stay in place
        weights = _cold_start_weights(selected, config, corpus_sizes)
    else:
        weights = _refresh_weights(selected, competence.self_competence, config, corpus_sizes)

    weighted = None
    improved = False
    best_weighted_loss = state.best_weighted_loss
    best_round = state.best_round
    rounds_since_best = state.rounds_since_best
    if dev_sizes is not None:
        weighted = weighted_dev_loss(dev_loss, dev_sizes)
        if weighted < best_weighted_loss:
            improved = True
            best_weighted_loss, best_round, rounds_since_best = weighted, round_index, 0
        else:
            rounds_since_best += 1

    for code in promotions:
        logger.info(f"Promoted {code} at step {state.step} (c-hat {competence.hrl_competence[code]:.4f})")
    logger.debug(f"Round {round_index} at step {state.step}: selected={list(selected)}")

    record = EvaluationRecord(
        round=round_index,
        step=state.step,
        dev_loss=dev_loss,
        competence=competence.self_competence,
        hrl_competence=competence.hrl_competence,
        promoted=promotions,
        fallback=[],
        selected=list(selected),
        candidate=list(candidate),
        weights=weights.to_dict(),
        weighted_dev_loss=weighted,
        improved=improved
    )
    new_state = replace(
        state,
        selected=selected,
        candidate=candidate,
        weights=weights,
        eval_round=round_index + 1,
        best_weighted_loss=best_weighted_loss,
        best_round=best_round,
        rounds_since_best=rounds_since_best,
        competence=competence,
        trace=state.trace + (record,)
    )
    return new_state, promotions


def force_promote_remaining(state: SchedulerState, config: Optional[SchedulerConfig] = None,
                            corpus_sizes: Optional[Union[CorpusSizes, Mapping[str, int]]] = None
                            ) -> SchedulerState:
    """Move every leftover candidate into the selected set."""
    if not state.candidate:
        return state

    forced = list(state.candidate)
    selected = tuple(sorted(state.selected + state.candidate))
    c = state.competence.self_competence if state.competence is not None else None
    if c is not None and any(code not in c for code in selected):
        c = None
    weights = _refresh_weights(selected, c, config, corpus_sizes)
    logger.warning(f"Fallback promoted {', '.join(forced)} at step {state.step}")

    trace = state.trace
    if trace and trace[-1].round == state.eval_round - 1 and trace[-1].step == state.step:
        last = trace[-1]
        trace = trace[:-1] + (replace(last, fallback=forced, selected=list(selected), candidate=[],
                                      weights=weights.to_dict()),)
    return replace(state, selected=selected, candidate=(), weights=weights, fallback_fired=True, trace=trace)


def _evaluate(trainer: Trainer, languages, config: SchedulerConfig, step: int) -> TrainerReport:
    try:
        return trainer.eval_dev(config.dev_sample_size, languages)
    except Exception as e:
        raise TrainerError(f"trainer failed at step {step}: {e}") from e


def _train(trainer: Trainer, weights: SamplingWeights, n: int, step: int) -> None:
    try:
        trainer.train_steps(weights, n)
    except Exception as e:
        raise TrainerError(f"trainer failed at step {step}: {e}") from e


def _should_stop(state: SchedulerState, config: SchedulerConfig) -> bool:
    return state.step >= config.max_steps or state.rounds_since_best >= config.patience


def run(trainer: Trainer, graph: BipartiteLangGraph, benchmarks: Mapping[str, BenchmarkLoss],
        dev_sizes: Mapping[str, int], config: SchedulerConfig,
        corpus_sizes: Optional[Union[CorpusSizes, Mapping[str, int]]] = None
        ) -> Tuple[SchedulerState, ScheduleTrace]:
    """Alternate training blocks and evaluation rounds until early stop or max_steps."""
    state = init(config, graph, benchmarks, corpus_sizes)
    logger.info(f"Curriculum run: threshold={config.threshold} variant={config.competence_variant.value} "
                f"weighting={config.weighting.value} max_steps={config.max_steps}")

    while True:
        report = _evaluate(trainer, state.languages, config, state.step)
        state, _ = on_evaluation(state, report, graph, benchmarks, config, dev_sizes, corpus_sizes)

        stop = _should_stop(state, config)
        if state.candidate and (state.eval_round - 1 >= config.fallback_round or stop):
            state = force_promote_remaining(state, config, corpus_sizes)
        if stop:
            if state.rounds_since_best >= config.patience:
                logger.warning(f"Early stop at step {state.step}: no improvement for {config.patience} rounds")
            break

        n = min(config.eval_interval, config.max_steps - state.step)
        _train(trainer, state.weights, n, state.step)
        state = replace(state, step=state.step + n)

    return state, state.to_trace()


def run_static(trainer: Trainer, graph: BipartiteLangGraph, weights: SamplingWeights,
               dev_sizes: Mapping[str, int], config: SchedulerConfig,
               benchmarks: Optional[Mapping[str, BenchmarkLoss]] = None) -> ScheduleTrace:
    """Fixed-weight baseline over every language, with the same evaluation protocol."""
    languages = sorted(graph.languages)
    if weights.support != frozenset(languages):
        raise ValueError("static weights must cover every language")

    trace = ScheduleTrace()
    step, best, rounds_since_best = 0, math.inf, 0
    while True:
        report = _evaluate(trainer, languages, config, step)
        dev_loss = {code: report.dev_loss[code] for code in languages}
        competence = {}
        if benchmarks is not None:
            competence = evaluate_competence(graph, dev_loss, benchmarks, config.competence_variant,
                                             lrls=()).self_competence
        weighted = weighted_dev_loss(dev_loss, dev_sizes)
        improved = weighted < best
        if improved:
            best, rounds_since_best = weighted, 0
        else:
            rounds_since_best += 1

        trace.records.append(EvaluationRecord(
            round=len(trace.records), step=step, dev_loss=dev_loss, competence=competence,
            hrl_competence={}, promoted=[], fallback=[], selected=languages, candidate=[],
            weights=weights.to_dict(), weighted_dev_loss=weighted, improved=improved
        ))
        if step >= config.max_steps or rounds_since_best >= config.patience:
            break

        n = min(config.eval_interval, config.max_steps - step)
        _train(trainer, weights, n, step)
        step += n

    return trace
