# app/utils/data_processor.py
import math
from typing import Dict, Iterable, List, Sequence

import numpy as np
import pandas as pd

from app.models.experiment import ExperimentReport
from app.models.language import BipartiteLangGraph
from app.models.schedule import ScheduleTrace

ROUND_FIELDS = ('weights', 'dev_loss', 'competence', 'hrl_competence')


class DataProcessor:
    def __init__(self, precision: int = 6):
        self.precision = precision

    @staticmethod
    def similarity_matrix(graph: BipartiteLangGraph) -> pd.DataFrame:
        """HRL x LRL edge weights in graph order"""
        values = [[graph.weight(hrl, lrl) for lrl in graph.lrl_codes] for hrl in graph.hrl_codes]
        frame = pd.DataFrame(values, index=graph.hrl_codes, columns=graph.lrl_codes)
        frame.index.name = 'hrl'
        return frame

    @staticmethod
    def format_matrix(frame: pd.DataFrame) -> str:
        return frame.to_string(float_format=lambda value: f"{value:g}")

    @staticmethod
    def round_table(trace: ScheduleTrace, field: str = 'weights') -> pd.DataFrame:
        """One row per evaluation round, one column per language; plot-ready"""
        if field not in ROUND_FIELDS:
            raise ValueError(f"unknown trace field: {field}")
        rows = []
        for record in trace:
            row = {'round': record.round, 'step': record.step}
            row.update(getattr(record, field))
            rows.append(row)
        frame = pd.DataFrame(rows)
        languages = sorted(column for column in frame.columns if column not in ('round', 'step'))
        frame = frame.reindex(columns=['round', 'step'] + languages)
        if field == 'weights':
            frame[languages] = frame[languages].fillna(0.0)
        return frame

    @staticmethod
    def run_frame(report: ExperimentReport) -> pd.DataFrame:
        """Per-seed results with a trailing mean row"""
        languages = sorted(report.hrls + report.lrls)
        rows = []
        for run in report.runs:
            row = {
                'seed': str(run.seed),
                'steps': run.steps,
                'exhaustion_step': run.exhaustion_step,
                'best_round': run.best_round,
                'final_weighted_dev_loss': run.final_weighted_dev_loss,
                'lrl_mean': run.lrl_mean,
                'hrl_mean': run.hrl_mean
            }
            row.update({f"loss_{code}": run.final_losses[code] for code in languages})
            rows.append(row)
        frame = pd.DataFrame(rows)

        numeric = ['final_weighted_dev_loss', 'lrl_mean', 'hrl_mean'] + [f"loss_{code}" for code in languages]
        mean_row = {column: np.nan for column in frame.columns}
        mean_row['seed'] = 'mean'
        mean_row.update({column: math.fsum(frame[column]) / len(frame) for column in numeric})
        frame = pd.concat([frame, pd.DataFrame([mean_row])], ignore_index=True)
        for column in ('steps', 'exhaustion_step', 'best_round'):
            frame[column] = pd.to_numeric(frame[column], errors='coerce').astype('Int64')
        return frame

    @staticmethod
    def comparison_table(reports: Sequence[ExperimentReport], labels: Sequence[str]) -> pd.DataFrame:
        """Methods x (weighted loss, LRL mean, HRL mean, per-language mean loss)"""
        rows = []
        for label, report in zip(labels, reports):
            row = {
                'run': label,
                'sampler': report.sampler,
                'seeds': len(report.runs),
                'final_weighted_dev_loss': report.mean('final_weighted_dev_loss'),
                'lrl_mean': report.mean('lrl_mean'),
                'hrl_mean': report.mean('hrl_mean')
            }
            row.update(report.mean_losses())
            rows.append(row)
        frame = pd.DataFrame(rows)
        fixed = ['run', 'sampler', 'seeds', 'final_weighted_dev_loss', 'lrl_mean', 'hrl_mean']
        languages = sorted(column for column in frame.columns if column not in fixed)
        return frame.reindex(columns=fixed + languages)

    @staticmethod
    def grid_summary(cells: Iterable[Dict], thresholds: Sequence[float], seeds: Sequence[int]) -> pd.DataFrame:
        """Threshold -> mean final weighted dev loss across seeds, argmin marked"""
        cells = list(cells)
        rows = []
        for index, threshold in enumerate(thresholds):
            row = {'threshold': threshold}
            losses = []
            for seed in seeds:
                match = [cell for cell in cells if cell['index'] == index and cell['seed'] == seed]
                loss = match[0].get('final_weighted_dev_loss') if match else None
                row[f"seed_{seed}"] = loss if loss is not None else np.nan
                if loss is not None:
                    losses.append(loss)
            row['failures'] = len(seeds) - len(losses)
            row['mean_weighted_dev_loss'] = math.fsum(losses) / len(losses) if losses else np.nan
            rows.append(row)

        frame = pd.DataFrame(rows)
        frame['best'] = ''
        means = frame['mean_weighted_dev_loss']
        if means.notna().any():
            frame.loc[int(means.idxmin()), 'best'] = '*'
        columns = ['threshold', 'mean_weighted_dev_loss'] + [f"seed_{seed}" for seed in seeds] + ['failures', 'best']
        return frame[columns]

    def to_text(self, frame: pd.DataFrame) -> str:
        return frame.to_string(index=False, na_rep='-', float_format=lambda value: f"{value:.{self.precision}f}") + '\n'

    @staticmethod
    def lrl_hrl_means(losses: Dict[str, float], hrls: List[str], lrls: List[str]):
        lrl_mean = math.fsum(losses[code] for code in lrls) / len(lrls)
        hrl_mean = math.fsum(losses[code] for code in hrls) / len(hrls)
        return lrl_mean, hrl_mean
