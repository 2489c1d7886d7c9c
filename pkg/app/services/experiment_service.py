# app/services/experiment_service.py
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Dict, Mapping, Optional, Sequence

from flask import current_app

from app.ml import scheduler
from app.ml.sampling import proportional_weights, temperature_weights, uniform_weights
from app.ml.trainer_sim import Scenario, SimTrainer, run_bitext_benchmark
from app.models.competence import BenchmarkLoss
from app.models.experiment import ExperimentConfig, ExperimentReport, RunReport, SamplerKind
from app.models.language import BipartiteLangGraph
from app.models.schedule import ScheduleTrace
from app.services.graph_service import GraphService
from app.utils.data_processor import DataProcessor
from app.utils.file_manager import REPORT_FILE, TRACE_FILE, FileManager
from app.utils.validators import Validators

logger = logging.getLogger(__name__)


def simulated_benchmarks(scenario: Scenario, graph: BipartiteLangGraph, sample_size: int,
                         seed: int) -> Dict[str, BenchmarkLoss]:
    return {code: replace(run_bitext_benchmark(code, scenario.params, sample_size=sample_size, seed=seed),
                          direction=scenario.direction)
            for code in graph.languages}


def static_weights(experiment: ExperimentConfig, scenario: Scenario, graph: BipartiteLangGraph):
    languages = graph.languages
    if experiment.sampler is SamplerKind.UNIFORM:
        return uniform_weights(languages)
    if experiment.sampler is SamplerKind.PROPORTIONAL:
        return proportional_weights(scenario.params.corpus_sizes, languages)
    return temperature_weights(scenario.params.corpus_sizes, languages, experiment.temperature)


def execute_run(experiment: ExperimentConfig, scenario: Scenario, graph: BipartiteLangGraph,
                benchmarks: Optional[Mapping[str, BenchmarkLoss]], seed: int):
    """Run one seed of an experiment; safe to call from worker threads.

    Returns the run report and its trace. Curriculum traces are re-validated
    against the scheduler invariants before they are handed back.
    """
    config = experiment.scheduler_config(seed)
    params = scenario.params
    if benchmarks is None:
        benchmarks = simulated_benchmarks(scenario, graph, config.dev_sample_size, seed)
    trainer = SimTrainer(params, graph, seed=seed)

    if experiment.sampler.is_curriculum:
        _, trace = scheduler.run(trainer, graph, benchmarks, params.dev_sizes, config,
                                 corpus_sizes=params.corpus_sizes)
        problems = Validators.validate_trace(trace, graph.languages, graph.hrl_codes)
        if problems:
            raise ValueError(f"invalid trace for seed {seed}: {problems[0]}")
    else:
        weights = static_weights(experiment, scenario, graph)
        trace = scheduler.run_static(trainer, graph, weights, params.dev_sizes, config, benchmarks)

    logger.info(f"{experiment.name} seed {seed}: {len(trace)} rounds, "
                f"final weighted dev loss {trace.final.weighted_dev_loss:.6f}")
    return build_run_report(trace, graph, seed), trace


def build_run_report(trace: ScheduleTrace, graph: BipartiteLangGraph, seed: int) -> RunReport:
    final = trace.final
    best = trace.best_record()
    lrl_mean, hrl_mean = DataProcessor.lrl_hrl_means(final.dev_loss, graph.hrl_codes, graph.lrl_codes)
    return RunReport(
        seed=seed,
        steps=final.step,
        rounds=len(trace),
        final_weighted_dev_loss=final.weighted_dev_loss,
        final_losses=dict(final.dev_loss),
        final_competence=dict(final.competence),
        final_weights=dict(final.weights),
        promotion_schedule=trace.promotion_schedule(),
        exhaustion_step=trace.exhaustion_step(),
        best_round=best.round if best is not None else None,
        best_weighted_dev_loss=best.weighted_dev_loss if best is not None else None,
        lrl_mean=lrl_mean,
        hrl_mean=hrl_mean
    )


class ExperimentService:
    def __init__(self):
        self.file_manager = FileManager()
        self.data_processor = DataProcessor()

    def _with_app_defaults(self, data: Dict) -> Dict:
        """Fill scheduler fields and seeds the experiment file leaves out from the app config"""
        config = current_app.config
        defaults = {
            'threshold': config['THRESHOLD'],
            'eval_interval': config['EVAL_INTERVAL'],
            'dev_sample_size': config['DEV_SAMPLE_SIZE'],
            'patience': config['PATIENCE'],
            'max_steps': config['MAX_STEPS']
        }
        data = dict(data)
        data['scheduler'] = {**defaults, **data.get('scheduler', {})}
        data.setdefault('seeds', list(config['SEEDS']))
        return data

    def load_experiment(self, path: Optional[str] = None, **overrides) -> ExperimentConfig:
        """Config defaults, then the experiment file, then command line overrides"""
        if path is None:
            data = {
                'schema_version': 1,
                'name': 'default',
                'scenario': current_app.config['DEFAULT_SCENARIO'],
                'sampler': SamplerKind.CCLM_AVG.value
            }
        else:
            data = self.file_manager.load_json(self.file_manager.experiment_path(path))
            if not isinstance(data, dict):
                raise ValueError(f"experiment config {path} must be a JSON object")
        return ExperimentConfig.from_dict(self._with_app_defaults(data)).with_overrides(**overrides)

    def prepare(self, experiment: ExperimentConfig):
        """Scenario, graph and (fixture) benchmarks for an experiment"""
        scenario = self.file_manager.load_scenario(experiment.scenario)
        if scenario.stats:
            self.check_dataset_sizes(scenario)
        if experiment.corpora is not None:
            graph = GraphService().build_from_corpora(experiment.corpora['hrls'], experiment.corpora['lrls'],
                                                      k=experiment.k, name=experiment.name)
        else:
            graph = self.file_manager.load_graph(experiment.graph or scenario.graph)

        benchmarks = None
        if experiment.benchmarks == 'fixture':
            benchmarks = self.file_manager.load_benchmarks(scenario.benchmarks, scenario.direction)
        return scenario, graph, benchmarks

    def check_dataset_sizes(self, scenario: Scenario) -> None:
        """Corpus and dev sizes of a scenario must match its dataset statistics fixture"""
        stats = self.file_manager.load_dataset_stats(scenario.stats)
        for code in sorted(scenario.params.curves):
            if code not in stats:
                raise ValueError(f"{scenario.stats} has no entry for {code}")
            curve = scenario.params.curves[code]
            if curve.corpus_size != stats[code]['train'] or curve.dev_size != stats[code]['dev']:
                raise ValueError(f"scenario {scenario.name} disagrees with {scenario.stats} on {code} sizes")

    def run_dir(self, experiment: ExperimentConfig) -> str:
        return os.path.join(experiment.output_dir or self.file_manager.output_dir, experiment.name)

    def run_experiment(self, experiment: ExperimentConfig) -> Dict:
        """Every seed of an experiment; writes report.json, report.csv, summary.txt and traces"""
        try:
            scenario, graph, benchmarks = self.prepare(experiment)
            current_app.logger.info(f"Running {experiment.name}: sampler={experiment.sampler.value} "
                                    f"scenario={scenario.name} seeds={list(experiment.seeds)}")

            report = ExperimentReport(config=experiment.to_dict(), scenario=scenario.name,
                                      sampler=experiment.sampler.value,
                                      hrls=graph.hrl_codes, lrls=graph.lrl_codes)
            run_dir = self.run_dir(experiment)
            for seed in experiment.seeds:
                run, trace = execute_run(experiment, scenario, graph, benchmarks, seed)
                report.runs.append(run)
                if not self._write_seed(os.path.join(run_dir, f"seed_{seed}"), trace):
                    return {'error': f'Could not write traces to {run_dir}'}

            frame = self.data_processor.run_frame(report)
            summary = self._summary_text(report, frame)
            written = (self.file_manager.save_json(os.path.join(run_dir, REPORT_FILE), report.to_dict())
                       and self.file_manager.save_frame(os.path.join(run_dir, 'report.csv'), frame)
                       and self.file_manager.save_text(os.path.join(run_dir, 'summary.txt'), summary))
            if not written:
                return {'error': f'Could not write report to {run_dir}'}

            current_app.logger.info(f"Report written to {run_dir}")
            return {'report': report.to_dict(), 'summary': summary, 'run_dir': run_dir, 'success': True}

        except Exception as e:
            current_app.logger.error(f"Run error: {str(e)}")
            return {'error': str(e)}

    def _write_seed(self, seed_dir: str, trace: ScheduleTrace) -> bool:
        tables = {
            'weights.csv': self.data_processor.round_table(trace, 'weights'),
            'dev_loss.csv': self.data_processor.round_table(trace, 'dev_loss'),
            'competence.csv': self.data_processor.round_table(trace, 'competence')
        }
        if not self.file_manager.save_trace(os.path.join(seed_dir, TRACE_FILE), trace):
            return False
        return all(self.file_manager.save_frame(os.path.join(seed_dir, name), frame)
                   for name, frame in tables.items())

    def _summary_text(self, report: ExperimentReport, frame) -> str:
        lines = [
            f"experiment: {report.config['name']}",
            f"scenario: {report.scenario}",
            f"sampler: {report.sampler}",
            ''
        ]
        lines.append(self.data_processor.to_text(frame).rstrip('\n'))
        for run in report.runs:
            if not run.promotion_schedule:
                continue
            lines.append('')
            lines.append(f"promotions (seed {run.seed}, candidates exhausted at step {run.exhaustion_step}):")
            for code, entry in sorted(run.promotion_schedule.items(), key=lambda item: (item[1]['step'], item[0])):
                lines.append(f"  {code}: step {entry['step']} round {entry['round']} via {entry['via']}")
        return '\n'.join(lines) + '\n'

    def grid_search(self, experiment: ExperimentConfig, thresholds: Sequence[float],
                    workers: Optional[int] = None) -> Dict:
        """One run per threshold and seed; failed cells are summarized, not fatal"""
        workers = workers or current_app.config['GRID_WORKERS']
        try:
            scenario, graph, benchmarks = self.prepare(experiment)
        except Exception as e:
            current_app.logger.error(f"Grid search error: {str(e)}")
            return {'error': str(e)}

        jobs = [(index, threshold, seed) for index, threshold in enumerate(thresholds) for seed in experiment.seeds]

        def cell(job):
            index, threshold, seed = job
            try:
                cell_experiment = experiment.with_overrides(threshold=threshold)
                run, _ = execute_run(cell_experiment, scenario, graph, benchmarks, seed)
                return {'index': index, 'threshold': threshold, 'seed': seed,
                        'final_weighted_dev_loss': run.final_weighted_dev_loss}
            except Exception as e:
                logger.error(f"Grid cell t={threshold} seed={seed} failed: {str(e)}")
                return {'index': index, 'threshold': threshold, 'seed': seed, 'error': str(e)}

        current_app.logger.info(f"Grid search over {len(thresholds)} thresholds x {len(experiment.seeds)} seeds "
                                f"with {workers} worker(s)")
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                cells = list(pool.map(cell, jobs))
        else:
            cells = [cell(job) for job in jobs]

        failures = [c for c in cells if 'error' in c]
        frame = self.data_processor.grid_summary(cells, thresholds, experiment.seeds)
        text = self.data_processor.to_text(frame)
        if failures:
            text += ''.join(f"failed: t={c['threshold']} seed={c['seed']}: {c['error']}\n" for c in failures)

        grid_dir = os.path.join(experiment.output_dir or self.file_manager.output_dir, f"{experiment.name}_grid")
        written = (self.file_manager.save_frame(os.path.join(grid_dir, 'summary.csv'), frame)
                   and self.file_manager.save_text(os.path.join(grid_dir, 'summary.txt'), text))
        if not written:
            return {'error': f'Could not write grid summary to {grid_dir}'}

        best = frame.loc[frame['best'] == '*', 'threshold']
        return {
            'summary': text,
            'rows': frame.to_dict(orient='records'),
            'best_threshold': float(best.iloc[0]) if len(best) else None,
            'failures': failures,
            'grid_dir': grid_dir,
            'success': True
        }
