# app/utils/file_manager.py
import json
import os
from typing import Any, Dict, Iterator, Optional

import pandas as pd
from flask import current_app

from app.ml.competence import load_benchmark_fixture
from app.ml.lang_graph import load_graph_fixture
from app.ml.trainer_sim import Scenario, load_scenario
from app.models.competence import BenchmarkLoss
from app.models.language import BipartiteLangGraph
from app.models.schedule import ScheduleTrace

REPORT_FILE = 'report.json'
TRACE_FILE = 'trace.ndjson'


class FileManager:
    def __init__(self):
        self.fixtures_dir = current_app.config['FIXTURES_DIR']
        self.scenarios_dir = current_app.config['SCENARIOS_DIR']
        self.experiments_dir = current_app.config['EXPERIMENTS_DIR']
        self.output_dir = current_app.config['OUTPUT_DIR']

    @staticmethod
    def _resolve(name_or_path: str, directory: str) -> str:
        """Accept either a file path or the bare name of a bundled JSON file"""
        if os.path.isfile(name_or_path):
            return name_or_path
        candidate = os.path.join(directory, f"{name_or_path}.json")
        if os.path.isfile(candidate):
            return candidate
        raise ValueError(f"file not found: {name_or_path}")

    def fixture_path(self, name: str) -> str:
        return self._resolve(name, self.fixtures_dir)

    def load_graph(self, name_or_path: str) -> BipartiteLangGraph:
        return load_graph_fixture(self.fixture_path(name_or_path))

    def load_benchmarks(self, name_or_path: str, direction: str = 'xxx-eng') -> Dict[str, BenchmarkLoss]:
        return load_benchmark_fixture(self.fixture_path(name_or_path), direction)

    def load_dataset_stats(self, name_or_path: str) -> Dict[str, Dict[str, int]]:
        """Train/dev/test pair counts per language"""
        data = self.load_json(self.fixture_path(name_or_path))
        try:
            return {record['language']: {split: int(record[split]) for split in ('train', 'dev', 'test')}
                    for record in data['records']}
        except (KeyError, TypeError, ValueError) as e:
            raise ValueError(f"malformed dataset statistics {name_or_path}: {e}") from e

    def load_scenario(self, name_or_path: str) -> Scenario:
        return load_scenario(self._resolve(name_or_path, self.scenarios_dir))

    def experiment_path(self, name_or_path: str) -> str:
        return self._resolve(name_or_path, self.experiments_dir)

    @staticmethod
    def load_json(path: str) -> Any:
        try:
            with open(path, 'r', encoding='utf-8') as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ValueError(f"cannot read {path}: {e}") from e

    @staticmethod
    def iter_corpus_lines(path: str) -> Iterator[str]:
        try:
            with open(path, 'r', encoding='utf-8') as f:
                yield from f
        except OSError as e:
            raise ValueError(f"cannot read corpus: {e.strerror or e}") from e

    def save_json(self, path: str, data: Any) -> bool:
        try:
            os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
            with open(path, 'w', encoding='utf-8') as f:
                json.dump(data, f, indent=2, ensure_ascii=False)
                f.write('\n')
            return True
        except (OSError, TypeError) as e:
            current_app.logger.error(f"Failed to save {path}: {str(e)}")
            return False

    def save_text(self, path: str, text: str) -> bool:
        try:
            os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
            with open(path, 'w', encoding='utf-8', newline='\n') as f:
                f.write(text)
            return True
        except OSError as e:
            current_app.logger.error(f"Failed to save {path}: {str(e)}")
            return False

    def save_trace(self, path: str, trace: ScheduleTrace) -> bool:
        return self.save_text(path, trace.to_ndjson())

    def save_frame(self, path: str, frame: pd.DataFrame) -> bool:
        return self.save_text(path, frame.to_csv(index=False, lineterminator='\n'))

    def load_trace(self, path: str) -> ScheduleTrace:
        try:
            with open(path, 'r', encoding='utf-8') as f:
                return ScheduleTrace.from_ndjson(f.read())
        except (OSError, ValueError, TypeError) as e:
            raise ValueError(f"cannot read trace {path}: {e}") from e

    def load_run_report(self, run_dir: str) -> Optional[Dict]:
        """Retrieve the report.json of a run directory"""
        path = os.path.join(run_dir, REPORT_FILE)
        if not os.path.exists(path):
            current_app.logger.error(f"No run report in {run_dir}")
            return None
        return self.load_json(path)
