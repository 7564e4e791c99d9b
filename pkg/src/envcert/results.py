from __future__ import annotations

from dataclasses import dataclass, field

PASS = "PASS"
FAIL = "FAIL"
UNKNOWN = "UNKNOWN"
VERDICTS = (PASS, FAIL, UNKNOWN)


@dataclass
class CheckResult:
    verdict: str
    message: str = ""
    data: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def __bool__(self):
        return self.passed


def combine(verdicts) -> str:
    """PASS only if everything passed; any FAIL dominates UNKNOWN."""
    verdicts = list(verdicts)
    if verdicts and all(v == PASS for v in verdicts):
        return PASS
    if any(v == FAIL for v in verdicts):
        return FAIL
    return UNKNOWN
