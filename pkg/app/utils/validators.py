# app/utils/validators.py
import math
import re
from typing import Iterable, List, Tuple

from app.models.schedule import ScheduleTrace

LANGUAGE_CODE_PATTERN = re.compile(r'^[A-Za-z][A-Za-z0-9_-]*$')


class Validators:
    @staticmethod
    def validate_language_code(code: str) -> bool:
        """Validate a short language identifier such as 'aze'"""
        return bool(code) and bool(LANGUAGE_CODE_PATTERN.match(code))

    @staticmethod
    def validate_threshold(threshold: float) -> bool:
        """Validate a promotion threshold"""
        return isinstance(threshold, (int, float)) and 0.0 <= threshold <= 1.0

    @staticmethod
    def validate_thresholds(thresholds: Iterable[float]) -> bool:
        thresholds = list(thresholds)
        return bool(thresholds) and all(Validators.validate_threshold(t) for t in thresholds)

    @staticmethod
    def sanitize_input(input_string: str) -> str:
        """Strip quoting and markup characters from user input"""
        if not input_string:
            return ""
        sanitized = re.sub(r'[<>"\']', '', input_string)
        return sanitized.strip()

    @staticmethod
    def parse_assignment(value: str) -> Tuple[str, str]:
        """Split a CODE=PATH command line value; the path is kept verbatim"""
        code, sep, path = (value or '').partition('=')
        code = Validators.sanitize_input(code)
        if not sep or not Validators.validate_language_code(code) or not path:
            raise ValueError(f"expected CODE=PATH, got {value!r}")
        return code, path

    @staticmethod
    def parse_float_list(value: str) -> List[float]:
        try:
            return [float(item) for item in value.split(',') if item.strip()]
        except ValueError:
            raise ValueError(f"expected comma separated numbers, got {value!r}") from None

    @staticmethod
    def validate_trace(trace: ScheduleTrace, languages: Iterable[str], hrls: Iterable[str]) -> List[str]:
        """Check scheduler invariants on a finished trace; returns the problems found"""
        problems = []
        languages = set(languages)
        hrls = set(hrls)
        previous_step = None
        previous_selected = set()
        promoted_once = set()

        for record in trace:
            label = f"round {record.round}"
            selected, candidate = set(record.selected), set(record.candidate)

            if previous_step is not None and record.step <= previous_step:
                problems.append(f"{label}: step {record.step} does not increase")
            if selected & candidate or selected | candidate != languages:
                problems.append(f"{label}: selected and candidate sets do not partition the languages")
            if not hrls <= selected:
                problems.append(f"{label}: an HRL is missing from the selected set")
            if not previous_selected <= selected:
                problems.append(f"{label}: selected set shrank")
            if set(record.weights) != selected:
                problems.append(f"{label}: weight support differs from the selected set")
            if record.weights and abs(math.fsum(record.weights.values()) - 1.0) > 1e-9:
                problems.append(f"{label}: weights are not normalized")

            for code in list(record.promoted) + list(record.fallback):
                if code in promoted_once:
                    problems.append(f"{label}: {code} promoted twice")
                if code in previous_selected:
                    problems.append(f"{label}: {code} promoted while already selected")
                promoted_once.add(code)
            unexplained = selected - previous_selected - hrls - set(record.promoted) - set(record.fallback)
            if unexplained:
                problems.append(f"{label}: {sorted(unexplained)[0]} selected without promotion")

            previous_step = record.step
            previous_selected = selected

        final = trace.final
        if final is not None and final.candidate:
            problems.append("final record still has candidates")
        return problems
