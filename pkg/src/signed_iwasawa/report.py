from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Report:
    """Outcome of a verification: overall verdict plus one entry per check."""

    name: str
    checks: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["ok"] for c in self.checks)

    def add(self, ok: bool, **details) -> bool:
        self.checks.append({"ok": bool(ok), **details})
        return bool(ok)

    def failures(self) -> list:
        return [c for c in self.checks if not c["ok"]]

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "checks": self.checks, "info": self.info}

    def __bool__(self) -> bool:
        return self.passed
