"""Domain types for the rubric pipeline."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..data.schema import DIMENSIONS

CODE_PATTERN = re.compile(r"^(CU|SC|PF|AR)([0-9]+)$")


class ParseError(ValueError):
    """No JSON object could be extracted from a completion."""


class EmptyRubricError(ValueError):
    """The teacher stage produced no valid indicators."""


class IncompleteVerdictError(ValueError):
    """The evaluation stage skipped one or more indicators."""

    def __init__(self, missing: list[str]):
        self.missing = list(missing)
        super().__init__(f"missing verdicts for: {', '.join(self.missing)}")


@dataclass(frozen=True)
class Indicator:
    code: str
    category: str
    ordinal: int
    text: str

    @classmethod
    def from_code(cls, code: str, text: str) -> "Indicator":
        m = CODE_PATTERN.match(code)
        if m is None:
            raise ValueError(f"invalid indicator code {code!r}")
        return cls(code=code, category=m.group(1), ordinal=int(m.group(2)), text=text)


@dataclass
class IndicatorSet:
    problem_id: str
    indicators: list[Indicator] = field(default_factory=list)

    def codes(self) -> list[str]:
        return [ind.code for ind in self.indicators]

    def by_category(self) -> dict[str, list[Indicator]]:
        out: dict[str, list[Indicator]] = {d: [] for d in DIMENSIONS}
        for ind in self.indicators:
            out[ind.category].append(ind)
        return out
