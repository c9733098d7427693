"""Relational constraints over matched participant spans.

Evaluates linearity, adjacency, cooccurrence, exclusion, and requirement
constraints against a span assignment, with hard/soft weighting. A dependency
kind is accepted for storage but always evaluates inapplicable (the engine
builds no dependency graph). Spans are inclusive token-index pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Sequence, Tuple

KINDS = ("linearity", "adjacency", "cooccurrence", "exclusion", "requirement", "dependency")

SATISFIED = "satisfied"
VIOLATED = "violated"
INAPPLICABLE = "inapplicable"


class ValidationError(Exception):
    """Raised on malformed constraints or overlapping spans."""


@dataclass(frozen=True)
class PropertyConstraint:
    kind: str
    participants: Tuple[str, ...]
    weight: str = "hard"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown constraint kind {self.kind!r}")
        if self.weight not in ("hard", "soft"):
            raise ValidationError(f"weight must be hard or soft, got {self.weight!r}")
        if len(self.participants) != 2:
            raise ValidationError(
                f"{self.kind} takes exactly 2 participants, got {self.participants!r}"
            )


Span = Tuple[int, int]


@dataclass
class SpanAssignment:
    """Participant tag -> inclusive (start, end) span; missing = unmatched."""

    spans: Dict[str, Span] = field(default_factory=dict)

    def match(self, tag: str, span: Span) -> None:
        s, e = int(span[0]), int(span[1])
        if s < 0 or e < s:
            raise ValidationError(f"invalid span {span!r} for {tag!r}")
        if tag in self.spans and self.spans[tag] != (s, e):
            raise ValidationError(f"participant {tag!r} assigned twice")
        self.spans[tag] = (s, e)

    def span(self, tag: str) -> Optional[Span]:
        return self.spans.get(tag)

    def matched(self, tag: str) -> bool:
        return tag in self.spans


@dataclass
class PropertyEvaluation:
    verdicts: Tuple[Tuple[PropertyConstraint, str], ...]
    hard_violations: int
    soft_violations: int

    def all_satisfied(self) -> bool:
        return all(v == SATISFIED for _, v in self.verdicts)

    def verdict_list(self) -> Tuple[str, ...]:
        return tuple(v for _, v in self.verdicts)


def _check_overlaps(assignment: SpanAssignment) -> None:
    spans = sorted(assignment.spans.items(), key=lambda kv: kv[1])
    for (tag_a, a), (tag_b, b) in zip(spans, spans[1:]):
        if b[0] <= a[1]:
            raise ValidationError(
                f"spans overlap: {tag_a!r}={a} and {tag_b!r}={b}"
            )


def evaluate(
    constraints: Sequence[PropertyConstraint] | Iterable[PropertyConstraint],
    assignment: SpanAssignment,
) -> PropertyEvaluation:
    """Verdict per constraint over the assignment.

    linearity(a,b): every token of a precedes every token of b.
    adjacency(a,b): b starts right after a ends.
    cooccurrence(a,b): both matched or both unmatched.
    exclusion(a,b): not both matched.
    requirement(a,b): a unmatched, or b matched.
    linearity/adjacency with an unmatched participant are inapplicable;
    dependency constraints are always inapplicable.
    """
    _check_overlaps(assignment)
    verdicts = []
    hard = soft = 0
    for c in constraints:
        verdict = _evaluate_one(c, assignment)
        if verdict == VIOLATED:
            if c.weight == "hard":
                hard += 1
            else:
                soft += 1
        verdicts.append((c, verdict))
    return PropertyEvaluation(tuple(verdicts), hard, soft)


def _evaluate_one(c: PropertyConstraint, assignment: SpanAssignment) -> str:
    a, b = c.participants
    sa, sb = assignment.span(a), assignment.span(b)
    if c.kind == "dependency":
        return INAPPLICABLE
    if c.kind == "linearity":
        if sa is None or sb is None:
            return INAPPLICABLE
        return SATISFIED if sa[1] < sb[0] else VIOLATED
    if c.kind == "adjacency":
        if sa is None or sb is None:
            return INAPPLICABLE
        return SATISFIED if sa[1] + 1 == sb[0] else VIOLATED
    if c.kind == "cooccurrence":
        return SATISFIED if (sa is None) == (sb is None) else VIOLATED
    if c.kind == "exclusion":
        return VIOLATED if (sa is not None and sb is not None) else SATISFIED
    # requirement: antecedent matched demands consequent matched
    if sa is None or sb is not None:
        return SATISFIED
    return VIOLATED


def relaxation_score(ev: PropertyEvaluation, soft_penalty: float) -> float:
    """0 when any hard constraint is violated, else (1 - p)^soft_violations."""
    if not 0 < soft_penalty <= 1:
        raise ValidationError(f"soft_penalty must lie in (0, 1], got {soft_penalty}")
    if ev.hard_violations > 0:
        return 0.0
    return (1.0 - soft_penalty) ** ev.soft_violations
