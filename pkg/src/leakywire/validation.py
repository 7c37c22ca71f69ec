from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Violation:
    invariant: str
    witness: tuple[float, ...] | None = None
    detail: str = ""


@dataclass
class ValidationReport:
    """Outcome of a validation pass. Rejection is data, not an exception."""

    subject: str
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, invariant: str, witness=None, detail: str = "") -> None:
        if witness is not None:
            witness = tuple(float(w) for w in witness)
        self.violations.append(Violation(invariant, witness, detail))

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "ok": self.ok,
            "violations": [
                {"invariant": v.invariant, "witness": v.witness, "detail": v.detail}
                for v in self.violations
            ],
        }

    def __bool__(self) -> bool:
        return self.ok
