"""Structured verification reports with versioned JSON serialization."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

SCHEMA_VERSION = 1

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped-resource"


@dataclass
class CheckResult:
    name: str
    params: dict
    status: str
    detail: dict = field(default_factory=dict)
    time_s: float = 0.0

    def to_json(self, timing: bool = True) -> dict:
        out = {"check": self.name, "params": self.params, "status": self.status,
               "detail": self.detail}
        if timing:
            out["time_s"] = round(self.time_s, 3)
        return out


@dataclass
class VerificationReport:
    scenario: dict
    results: list

    def summary(self) -> dict:
        counts = {PASS: 0, FAIL: 0, SKIPPED: 0}
        for r in self.results:
            counts[r.status] = counts.get(r.status, 0) + 1
        return counts

    def ok(self, strict: bool = False) -> bool:
        s = self.summary()
        if s.get(FAIL):
            return False
        if strict and s.get(SKIPPED):
            return False
        return True

    def to_json(self, timing: bool = True) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "scenario": self.scenario,
            "results": [r.to_json(timing) for r in self.results],
            "summary": self.summary(),
        }

    def dumps(self, timing: bool = True) -> str:
        return json.dumps(self.to_json(timing), indent=2, sort_keys=True)

    def text_table(self) -> str:
        lines = []
        width = max([len(r.name) for r in self.results] + [10])
        lines.append(f"{'check'.ljust(width)}  {'status'.ljust(16)}  time")
        lines.append("-" * (width + 28))
        for r in self.results:
            lines.append(f"{r.name.ljust(width)}  {r.status.ljust(16)}  {r.time_s:8.2f}s")
        s = self.summary()
        lines.append("-" * (width + 28))
        lines.append(f"pass: {s.get(PASS, 0)}  fail: {s.get(FAIL, 0)}  "
                     f"skipped-resource: {s.get(SKIPPED, 0)}")
        return "\n".join(lines)


def homology_table_text(title: str, dims: dict) -> str:
    if not dims:
        return f"{title}: 0 (acyclic)"
    degs = sorted(dims)
    row = "  ".join(f"H_{n}={dims[n]}" for n in degs)
    return f"{title}: {row}"


class timed:
    """Context manager measuring a check's wall time."""

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0
        return False
