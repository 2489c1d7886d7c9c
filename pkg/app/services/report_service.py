# app/services/report_service.py
import os
from itertools import combinations
from typing import Dict, List, Optional, Sequence

from flask import current_app

from app.models.experiment import ExperimentReport
from app.utils.data_processor import DataProcessor
from app.utils.file_manager import TRACE_FILE, FileManager

# config keys that may differ between runs whose traces are still expected to match
_LABEL_KEYS = ('name',)


class ReportService:
    def __init__(self):
        self.file_manager = FileManager()
        self.data_processor = DataProcessor()

    def load_reports(self, run_dirs: Sequence[str]) -> List[ExperimentReport]:
        reports = []
        for run_dir in run_dirs:
            data = self.file_manager.load_run_report(run_dir)
            if data is None:
                raise ValueError(f"no report.json in {run_dir}")
            try:
                reports.append(ExperimentReport.from_dict(data))
            except ValueError as e:
                raise ValueError(f"{run_dir}: {e}") from e

        scenarios = sorted({report.scenario for report in reports})
        if len(scenarios) > 1:
            raise ValueError(f"scenario mismatch: {', '.join(scenarios)}")
        languages = {(tuple(report.hrls), tuple(report.lrls)) for report in reports}
        if len(languages) > 1:
            raise ValueError("schema mismatch: runs cover different languages")
        return reports

    @staticmethod
    def _comparable(a: ExperimentReport, b: ExperimentReport) -> bool:
        def strip(config):
            return {key: value for key, value in config.items() if key not in _LABEL_KEYS}
        return strip(a.config) == strip(b.config)

    def compare_traces(self, left_dir: str, right_dir: str, seed: int) -> Optional[int]:
        """Round of the first differing record, or None when the traces match"""
        left = self.file_manager.load_trace(os.path.join(left_dir, f"seed_{seed}", TRACE_FILE))
        right = self.file_manager.load_trace(os.path.join(right_dir, f"seed_{seed}", TRACE_FILE))
        for a, b in zip(left, right):
            if a.to_dict() != b.to_dict():
                return a.round
        if len(left) != len(right):
            return min(len(left), len(right))
        return None

    def divergences(self, run_dirs: Sequence[str], reports: Sequence[ExperimentReport]) -> List[Dict]:
        results = []
        for (i, a), (j, b) in combinations(enumerate(reports), 2):
            if not self._comparable(a, b):
                continue
            shared = sorted({run.seed for run in a.runs} & {run.seed for run in b.runs})
            for seed in shared:
                round_index = self.compare_traces(run_dirs[i], run_dirs[j], seed)
                results.append({
                    'left': run_dirs[i],
                    'right': run_dirs[j],
                    'seed': seed,
                    'diverged_at_round': round_index
                })
        return results

    def compare(self, run_dirs: Sequence[str], output_dir: Optional[str] = None) -> Dict:
        """Comparison table across run directories, written as CSV and text"""
        try:
            reports = self.load_reports(run_dirs)
            labels = [os.path.basename(os.path.normpath(run_dir)) for run_dir in run_dirs]
            frame = self.data_processor.comparison_table(reports, labels)
            text = f"scenario: {reports[0].scenario}\n" + self.data_processor.to_text(frame)

            divergences = self.divergences(run_dirs, reports)
            for entry in divergences:
                left, right = os.path.basename(entry['left']), os.path.basename(entry['right'])
                if entry['diverged_at_round'] is None:
                    text += f"traces {left} and {right} (seed {entry['seed']}) are identical\n"
                else:
                    text += (f"traces {left} and {right} (seed {entry['seed']}) diverge "
                             f"at round {entry['diverged_at_round']}\n")
                    current_app.logger.warning(f"Trace divergence between {left} and {right} "
                                               f"at round {entry['diverged_at_round']}")

            output_dir = output_dir or self.file_manager.output_dir
            written = (self.file_manager.save_frame(os.path.join(output_dir, 'comparison.csv'), frame)
                       and self.file_manager.save_text(os.path.join(output_dir, 'comparison.txt'), text))
            if not written:
                return {'error': f'Could not write comparison to {output_dir}'}

            return {
                'table': frame.to_dict(orient='records'),
                'text': text,
                'divergences': divergences,
                'output_dir': output_dir,
                'success': True
            }

        except ValueError as e:
            current_app.logger.error(f"Report error: {str(e)}")
            return {'error': str(e)}
