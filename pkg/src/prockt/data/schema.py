"""Record schema for process-annotated knowledge-tracing data.

One interaction is a student attempting one problem: question id, concept
ids, correctness, and the OCR-transcribed solving-process text, optionally
annotated with a four-dimension proficiency ratio vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

DIMENSIONS = ("CU", "SC", "PF", "AR")
QUESTION_TYPES = ("multiple_choice", "short_answer")


class ValidationError(ValueError):
    """A record violates the schema."""


@dataclass
class Problem:
    problem_id: str
    kc_ids: list[str]
    text: str
    answer: str
    question_type: str
    difficulty: int
    solution_text: str | None = None
    options: list[str] = field(default_factory=list)

    def validate(self) -> None:
        if not self.problem_id:
            raise ValidationError("problem_id must be non-empty")
        if not self.kc_ids:
            raise ValidationError(f"problem {self.problem_id}: kc_ids must be non-empty")
        if self.question_type not in QUESTION_TYPES:
            raise ValidationError(
                f"problem {self.problem_id}: question_type {self.question_type!r} "
                f"not in {QUESTION_TYPES}")
        if not 1 <= int(self.difficulty) <= 5:
            raise ValidationError(
                f"problem {self.problem_id}: difficulty {self.difficulty} outside 1..5")

    def to_json(self) -> dict:
        doc = {
            "problem_id": self.problem_id,
            "kc_ids": list(self.kc_ids),
            "text": self.text,
            "solution_text": self.solution_text,
            "answer": self.answer,
            "question_type": self.question_type,
            "difficulty": self.difficulty,
        }
        if self.options:
            doc["options"] = list(self.options)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "Problem":
        p = cls(
            problem_id=doc["problem_id"],
            kc_ids=list(doc["kc_ids"]),
            text=doc["text"],
            solution_text=doc.get("solution_text"),
            answer=doc["answer"],
            question_type=doc["question_type"],
            difficulty=int(doc["difficulty"]),
            options=list(doc.get("options", [])),
        )
        p.validate()
        return p


@dataclass
class MPRatios:
    """Per-dimension satisfied/total indicator ratios with presence masks."""

    values: dict[str, float]
    present: dict[str, bool]
    counts: dict[str, tuple[int, int]]

    @classmethod
    def from_counts(cls, counts: dict[str, tuple[int, int]]) -> "MPRatios":
        values, present, full = {}, {}, {}
        for d in DIMENSIONS:
            satisfied, total = counts.get(d, (0, 0))
            if total < 0 or satisfied < 0 or satisfied > total:
                raise ValidationError(f"dimension {d}: bad counts ({satisfied}, {total})")
            full[d] = (satisfied, total)
            present[d] = total > 0
            values[d] = satisfied / total if total > 0 else 0.0
        return cls(values=values, present=present, counts=full)

    @classmethod
    def absent(cls) -> "MPRatios":
        return cls.from_counts({})

    def validate(self) -> None:
        for d in DIMENSIONS:
            satisfied, total = self.counts[d]
            if self.present[d]:
                if total < 1 or not 0 <= satisfied <= total:
                    raise ValidationError(f"dimension {d}: bad counts ({satisfied}, {total})")
                if self.values[d] != satisfied / total:
                    raise ValidationError(f"dimension {d}: value != satisfied/total")
            elif total != 0:
                raise ValidationError(f"dimension {d}: absent but total = {total}")

    def to_json(self) -> dict:
        return {
            "values": {d: self.values[d] for d in DIMENSIONS},
            "present": {d: self.present[d] for d in DIMENSIONS},
            "counts": {d: list(self.counts[d]) for d in DIMENSIONS},
        }

    @classmethod
    def from_json(cls, doc: dict) -> "MPRatios":
        mp = cls(
            values={d: float(doc["values"][d]) for d in DIMENSIONS},
            present={d: bool(doc["present"][d]) for d in DIMENSIONS},
            counts={d: (int(doc["counts"][d][0]), int(doc["counts"][d][1])) for d in DIMENSIONS},
        )
        mp.validate()
        return mp


@dataclass
class InteractionRecord:
    student_id: str
    problem_id: str
    selected_answer: str
    correct: int
    duration: float
    process_text: str
    timestamp: int
    mp: MPRatios | None = None

    def validate(self) -> None:
        if not self.student_id:
            raise ValidationError("student_id must be non-empty")
        if self.correct not in (0, 1):
            raise ValidationError(
                f"student {self.student_id}, problem {self.problem_id}: "
                f"correct must be 0 or 1, got {self.correct!r}")
        if self.duration < 0:
            raise ValidationError(
                f"student {self.student_id}, problem {self.problem_id}: "
                f"duration must be >= 0, got {self.duration}")
        if self.mp is not None:
            self.mp.validate()

    def to_json(self) -> dict:
        doc = {
            "student_id": self.student_id,
            "problem_id": self.problem_id,
            "selected_answer": self.selected_answer,
            "correct": self.correct,
            "duration": self.duration,
            "process_text": self.process_text,
            "timestamp": self.timestamp,
        }
        if self.mp is not None:
            doc["mp"] = self.mp.to_json()
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "InteractionRecord":
        rec = cls(
            student_id=doc["student_id"],
            problem_id=doc["problem_id"],
            selected_answer=doc["selected_answer"],
            correct=doc["correct"],
            duration=doc["duration"],
            process_text=doc["process_text"],
            timestamp=int(doc["timestamp"]),
            mp=MPRatios.from_json(doc["mp"]) if doc.get("mp") is not None else None,
        )
        rec.validate()
        return rec


@dataclass
class StudentSequence:
    student_id: str
    steps: list[InteractionRecord]

    def validate(self) -> None:
        if not self.steps:
            raise ValidationError(f"student {self.student_id}: empty sequence")
        for rec in self.steps:
            if rec.student_id != self.student_id:
                raise ValidationError(
                    f"sequence {self.student_id} contains record for {rec.student_id}")
        ts = [rec.timestamp for rec in self.steps]
        if ts != sorted(ts):
            raise ValidationError(f"student {self.student_id}: timestamps not sorted")

    def __len__(self) -> int:
        return len(self.steps)
