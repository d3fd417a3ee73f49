"""Loading and saving datasets.

A dataset directory holds ``problems.json`` (array of problem objects)
and ``interactions.jsonl`` (one interaction per line). Interactions are
grouped by student and time-sorted on load.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from .schema import InteractionRecord, Problem, StudentSequence, ValidationError

PROBLEMS_FILE = "problems.json"
INTERACTIONS_FILE = "interactions.jsonl"


class DatasetFormatError(ValueError):
    """Malformed dataset file (bad JSON, bad line, dangling reference)."""


@dataclass
class Dataset:
    problems: dict[str, Problem]
    sequences: list[StudentSequence]

    def num_interactions(self) -> int:
        return sum(len(s) for s in self.sequences)


def load_problems(path) -> dict[str, Problem]:
    with open(path) as fh:
        docs = json.load(fh)
    problems: dict[str, Problem] = {}
    for doc in docs:
        p = Problem.from_json(doc)
        if p.problem_id in problems:
            raise DatasetFormatError(f"duplicate problem_id {p.problem_id!r}")
        problems[p.problem_id] = p
    return problems


def load_dataset(path) -> Dataset:
    """Load a dataset directory into time-sorted per-student sequences.

    Raises DatasetFormatError with the offending line number for malformed
    JSONL lines, and ValidationError listing dangling problem ids.
    """
    root = Path(path)
    problems = load_problems(root / PROBLEMS_FILE)
    by_student: dict[str, list[InteractionRecord]] = {}
    order: list[str] = []
    with open(root / INTERACTIONS_FILE) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
                rec = InteractionRecord.from_json(doc)
            except ValidationError:
                raise
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise DatasetFormatError(
                    f"{root / INTERACTIONS_FILE}: malformed record at line {lineno}: {exc}")
            if rec.student_id not in by_student:
                by_student[rec.student_id] = []
                order.append(rec.student_id)
            by_student[rec.student_id].append(rec)

    dangling = sorted({r.problem_id for recs in by_student.values() for r in recs
                       if r.problem_id not in problems})
    if dangling:
        raise ValidationError(f"interactions reference unknown problem ids: {dangling}")

    sequences = []
    for sid in order:
        steps = sorted(by_student[sid], key=lambda r: r.timestamp)
        seq = StudentSequence(student_id=sid, steps=steps)
        seq.validate()
        sequences.append(seq)
    return Dataset(problems=problems, sequences=sequences)


def save_dataset(path, dataset: Dataset) -> None:
    root = Path(path)
    os.makedirs(root, exist_ok=True)
    with open(root / PROBLEMS_FILE, "w") as fh:
        json.dump([p.to_json() for p in dataset.problems.values()], fh, indent=1)
    with open(root / INTERACTIONS_FILE, "w") as fh:
        for seq in dataset.sequences:
            for rec in seq.steps:
                fh.write(json.dumps(rec.to_json()) + "\n")
