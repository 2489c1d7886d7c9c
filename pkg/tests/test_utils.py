import math
import os

import pytest

from app.models.experiment import ExperimentReport, RunReport
from app.models.schedule import EvaluationRecord, ScheduleTrace
from app.utils.data_processor import DataProcessor
from app.utils.file_manager import FileManager


def run_report(seed, weighted):
    return RunReport(seed=seed, steps=200, final_weighted_dev_loss=weighted,
                     final_losses={'h': 4.0, 'l': weighted + 1.0}, final_competence={}, final_weights={},
                     promotion_schedule={}, exhaustion_step=100 if seed == 7 else None, best_round=2,
                     best_weighted_dev_loss=weighted, lrl_mean=weighted + 1.0, hrl_mean=4.0, rounds=3)


class TestDataProcessor:
    def test_similarity_matrix(self, related_graph):
        frame = DataProcessor.similarity_matrix(related_graph)
        assert list(frame.index) == ['tur', 'rus', 'por', 'ces']
        assert frame.loc['ces', 'slk'] == 0.68
        assert 'hrl' in DataProcessor.format_matrix(frame)

    def test_round_table_fills_unselected_weights(self):
        trace = ScheduleTrace(records=[
            EvaluationRecord(round=0, step=0, dev_loss={}, competence={}, hrl_competence={}, promoted=[],
                             fallback=[], selected=['h'], candidate=['l'], weights={'h': 1.0}),
            EvaluationRecord(round=1, step=100, dev_loss={}, competence={}, hrl_competence={}, promoted=['l'],
                             fallback=[], selected=['h', 'l'], candidate=[], weights={'h': 0.25, 'l': 0.75})
        ])
        frame = DataProcessor.round_table(trace, 'weights')
        assert list(frame.columns) == ['round', 'step', 'h', 'l']
        assert frame['l'].tolist() == [0.0, 0.75]

    def test_round_table_unknown_field(self):
        with pytest.raises(ValueError, match='unknown trace field'):
            DataProcessor.round_table(ScheduleTrace(), 'losses')

    def test_run_frame_mean_row(self):
        report = ExperimentReport(config={}, scenario='s', sampler='CCLM_AVG', hrls=['h'], lrls=['l'],
                                  runs=[run_report(7, 5.0), run_report(8, 6.0)])
        frame = DataProcessor.run_frame(report)
        assert frame['seed'].tolist() == ['7', '8', 'mean']
        assert frame['final_weighted_dev_loss'].iloc[-1] == 5.5
        assert frame['loss_l'].iloc[-1] == 6.5
        text = DataProcessor().to_text(frame)
        assert '5.500000' in text
        assert '-' in text.splitlines()[-1]

    def test_grid_summary_marks_argmin(self):
        cells = [
            {'index': 0, 'seed': 7, 'final_weighted_dev_loss': 5.0},
            {'index': 1, 'seed': 7, 'final_weighted_dev_loss': 4.0},
            {'index': 2, 'seed': 7, 'error': 'boom'}
        ]
        frame = DataProcessor.grid_summary(cells, [0.5, 0.7, 0.9], [7])
        assert frame['best'].tolist() == ['', '*', '']
        assert frame['failures'].tolist() == [0, 0, 1]
        assert math.isnan(frame['mean_weighted_dev_loss'].iloc[2])

    def test_lrl_hrl_means(self):
        assert DataProcessor.lrl_hrl_means({'a': 1.0, 'b': 3.0, 'h': 4.0}, ['h'], ['a', 'b']) == (2.0, 4.0)


class TestFileManager:
    def test_resolves_bundled_names(self, app):
        manager = FileManager()
        assert manager.load_graph('related_sim').weight('tur', 'aze') == 0.5
        assert manager.load_benchmarks('related_losses', 'eng-xxx')['aze'].loss == 9.703
        assert manager.load_scenario('diverse_m2o').graph == 'diverse_sim'

    def test_dataset_stats(self, app):
        stats = FileManager().load_dataset_stats('related_stats')
        assert stats['bel'] == {'train': 4510, 'dev': 248, 'test': 664}

    def test_unknown_name(self, app):
        with pytest.raises(ValueError, match='file not found: missing'):
            FileManager().load_graph('missing')

    def test_save_json_is_stable(self, app, tmp_path):
        path = str(tmp_path / 'nested' / 'data.json')
        assert FileManager().save_json(path, {'name': 'çekirdek', 'value': 1})
        with open(path, encoding='utf-8') as f:
            assert f.read() == '{\n  "name": "çekirdek",\n  "value": 1\n}\n'

    def test_missing_run_report(self, app, tmp_path):
        assert FileManager().load_run_report(str(tmp_path)) is None

    def test_unreadable_corpus(self, app, tmp_path):
        with pytest.raises(ValueError, match='cannot read corpus'):
            list(FileManager.iter_corpus_lines(os.path.join(str(tmp_path), 'absent.txt')))
