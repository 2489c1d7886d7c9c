# app/services/graph_service.py
import os
from typing import Dict, Mapping, Optional

from flask import current_app

from app.ml.lang_graph import build_graph, extract_vocab_profile, tokenize_lines
from app.models.language import BipartiteLangGraph, LanguageId, Side
from app.utils.data_processor import DataProcessor
from app.utils.file_manager import FileManager


class GraphService:
    def __init__(self):
        self.file_manager = FileManager()
        self.data_processor = DataProcessor()

    def build_from_corpora(self, hrl_corpora: Mapping[str, str], lrl_corpora: Mapping[str, str],
                           k: Optional[int] = None, name: Optional[str] = None) -> BipartiteLangGraph:
        """Vocabulary-overlap graph from one corpus file per language"""
        k = current_app.config['VOCAB_K'] if k is None else k
        profiles = {}
        for side, corpora in ((Side.HRL, hrl_corpora), (Side.LRL, lrl_corpora)):
            for code, path in corpora.items():
                lines = self.file_manager.iter_corpus_lines(path)
                try:
                    profiles[code] = extract_vocab_profile(tokenize_lines(lines), LanguageId(code, side), k)
                except ValueError as e:
                    raise ValueError(f"{path}: {e}") from e
                current_app.logger.debug(f"Profiled {code} from {path}: {len(profiles[code].entries)} tokens")
        return build_graph(list(hrl_corpora), list(lrl_corpora), profiles, name=name)

    def graph_build(self, hrl_corpora: Optional[Mapping[str, str]] = None,
                    lrl_corpora: Optional[Mapping[str, str]] = None, fixture: Optional[str] = None,
                    k: Optional[int] = None, output: Optional[str] = None, name: Optional[str] = None) -> Dict:
        try:
            if fixture:
                graph = self.file_manager.load_graph(fixture)
            else:
                graph = self.build_from_corpora(hrl_corpora, lrl_corpora, k, name=name)

            matrix = self.data_processor.similarity_matrix(graph)
            result = {
                'graph': graph.to_dict(),
                'matrix': self.data_processor.format_matrix(matrix),
                'success': True
            }
            if output:
                if not self.file_manager.save_json(output, graph.to_dict()):
                    return {'error': f'Could not write graph file {output}'}
                result['path'] = os.path.abspath(output)
                current_app.logger.info(f"Graph written to {output}")
            return result

        except ValueError as e:
            current_app.logger.error(f"Graph build error: {str(e)}")
            return {'error': str(e)}
