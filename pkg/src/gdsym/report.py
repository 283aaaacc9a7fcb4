"""Machine-readable verification reports shared by every suite."""
from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Optional

PASS = "pass"
FAIL = "fail"


@dataclass
class Entry:
    subject: str
    status: str
    verdict: str = ""
    witness: Optional[dict] = None
    wall_time: float = 0.0
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_json(self) -> dict:
        out = {"subject": self.subject, "status": self.status, "verdict": self.verdict, "wall_time": round(self.wall_time, 6)}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class Report:
    suite: str
    seed: int = 0
    entries: list = field(default_factory=list)

    def add(self, subject, ok: bool, verdict: str = "", witness=None, wall_time=0.0, **detail) -> Entry:
        e = Entry(subject, PASS if ok else FAIL, verdict, witness, wall_time, detail)
        self.entries.append(e)
        return e

    def extend(self, other: "Report", prefix: str = "") -> None:
        for e in other.entries:
            self.entries.append(Entry(prefix + e.subject, e.status, e.verdict, e.witness, e.wall_time, e.detail))

    @contextmanager
    def timed(self, subject):
        """Yield a dict to fill with ``ok``/``verdict``/``witness``/detail keys."""
        rec: dict[str, Any] = {}
        t0 = time.perf_counter()
        yield rec
        dt = time.perf_counter() - t0
        ok = rec.pop("ok")
        verdict = rec.pop("verdict", "")
        witness = rec.pop("witness", None)
        self.add(subject, ok, verdict, witness, dt, **rec)

    @property
    def failures(self) -> list:
        return [e for e in self.entries if not e.passed]

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> dict:
        n_fail = len(self.failures)
        return {"total": len(self.entries), "passed": len(self.entries) - n_fail, "failed": n_fail}

    def to_json(self) -> dict:
        return {"suite": self.suite, "seed": self.seed, "summary": self.summary(), "entries": [e.to_json() for e in self.entries]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True, default=str)

    def table(self) -> str:
        lines = [f"{self.suite}: {self.summary()['passed']}/{self.summary()['total']} passed (seed {self.seed})"]
        for e in self.entries:
            mark = "ok  " if e.passed else "FAIL"
            extra = f" [{e.verdict}]" if e.verdict else ""
            lines.append(f"  {mark} {e.subject}{extra}")
        return "\n".join(lines)
