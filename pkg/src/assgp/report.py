"""Structured pass/fail reports shared by every verifier."""
from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class Entry:
    tag: str
    passed: bool
    checked: int = 0
    failed: int = 0
    detail: str = ""

    def to_json(self) -> dict:
        return {"tag": self.tag, "passed": self.passed, "checked": self.checked,
                "failed": self.failed, "detail": self.detail}


@dataclass
class Report:
    name: str
    entries: list[Entry] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(e.passed for e in self.entries)

    def add(self, tag: str, passed: bool, checked: int = 0, failed: int = 0, detail: str = "") -> Entry:
        e = Entry(tag, bool(passed), checked, failed, detail)
        self.entries.append(e)
        return e

    def tally(self, tag: str, checked: int, failures: list[str]) -> Entry:
        """Record a sampled check; keep the first few failure messages."""
        detail = "; ".join(failures[:3])
        return self.add(tag, not failures, checked, len(failures), detail)

    def merge(self, other: "Report", prefix: str = "") -> None:
        for e in other.entries:
            self.entries.append(Entry(prefix + e.tag, e.passed, e.checked, e.failed, e.detail))

    def failures(self) -> list[Entry]:
        return [e for e in self.entries if not e.passed]

    def to_json(self) -> dict:
        return {"name": self.name, "ok": self.ok, "entries": [e.to_json() for e in self.entries],
                "stats": self.stats}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def lines(self) -> list[str]:
        out = [f"{self.name}: {'PASS' if self.ok else 'FAIL'}"]
        for e in self.entries:
            mark = "ok  " if e.passed else "FAIL"
            extra = f" [{e.checked} checked, {e.failed} failed]" if e.checked else ""
            msg = f" {e.detail}" if e.detail else ""
            out.append(f"  {mark} {e.tag}{extra}{msg}")
        return out

    def __str__(self) -> str:
        return "\n".join(self.lines())
