"""Extract ``(c1, c2)`` from the "Final Answer" sentence of a free-text response."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from ..lifecycle import ConsumptionPlan, Provenance


class ParseStatus(str, Enum):
    OK = "ok"
    NO_FINAL_ANSWER = "no_final_answer"
    MALFORMED_NUMBERS = "malformed_numbers"


@dataclass(frozen=True)
class ParseResult:
    status: ParseStatus
    plan: ConsumptionPlan | None = None
    numbers: tuple[float, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return self.status is ParseStatus.OK


_MARKER = re.compile(r"final\s+answer", re.IGNORECASE)

# A number not glued to a preceding word or digit ("c1", "v2.0"), with
# optional comma grouping, decimals and a scale word.
_NUMBER = re.compile(
    r"(?<![\w.,])(?P<num>\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?)"
    r"(?!,\d)(?P<pct>\s*%)?"
    r"(?:\s*(?P<scale>million|thousand)\b)?",
    re.IGNORECASE,
)
_SCALE = {"million": 1e6, "thousand": 1e3}

# connectors that turn two numbers into a range rather than a pair
_RANGE_GAP = re.compile(r"\s*(?:units?\s*)?(?:-|–|—|~|to|or)\s*", re.IGNORECASE)
_AND_GAP = re.compile(r"\s*(?:units?\s*)?and\s*", re.IGNORECASE)
_BETWEEN = re.compile(r"between\s*$", re.IGNORECASE)


def _numbers_after(text: str) -> list[tuple[float, int, int]]:
    out = []
    for m in _NUMBER.finditer(text):
        if m.group("pct"):
            continue
        value = float(m.group("num").replace(",", ""))
        scale = m.group("scale")
        if scale:
            value *= _SCALE[scale.lower()]
        out.append((value, m.start("num"), m.end()))
    return out


def _is_range(text: str, first: tuple[float, int, int], second: tuple[float, int, int]) -> bool:
    gap = text[first[2]:second[1]]
    if _RANGE_GAP.fullmatch(gap):
        return True
    return bool(_AND_GAP.fullmatch(gap) and _BETWEEN.search(text[:first[1]]))


def parse_final_answer(raw_response: str) -> ParseResult:
    """Parse the last "Final Answer" block; the first two numbers are ``(c1, c2)``.

    Percentages are skipped. A range in either position ("between 700,000 and
    750,000", "700,000-750,000") makes the answer malformed instead of being
    averaged.
    """
    markers = list(_MARKER.finditer(raw_response or ""))
    if not markers:
        return ParseResult(ParseStatus.NO_FINAL_ANSWER)
    tail = raw_response[markers[-1].end():]
    nums = _numbers_after(tail)
    if len(nums) < 2:
        return ParseResult(ParseStatus.MALFORMED_NUMBERS, numbers=tuple(n[0] for n in nums))
    for a, b in zip(nums[:2], nums[1:3]):
        if _is_range(tail, a, b):
            return ParseResult(ParseStatus.MALFORMED_NUMBERS, numbers=tuple(n[0] for n in nums))
    c1, c2 = nums[0][0], nums[1][0]
    return ParseResult(
        ParseStatus.OK,
        ConsumptionPlan((c1, c2), Provenance.AGENT_PARSED),
        numbers=tuple(n[0] for n in nums),
    )
