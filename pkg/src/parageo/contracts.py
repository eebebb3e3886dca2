"""Machine-readable contract violations shared by all modules."""

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Violation:
    condition: str
    location: object = None
    detail: str = ""

    def as_dict(self):
        d = asdict(self)
        if not isinstance(d["location"], (int, float, str, type(None))):
            d["location"] = str(d["location"])
        return d


class ContractViolation(Exception):
    """Raised when an output fails its own contract check."""

    def __init__(self, violations, what="contract"):
        self.violations = list(violations)
        self.what = what
        lines = "; ".join(f"{v.condition}@{v.location}: {v.detail}" for v in self.violations[:5])
        super().__init__(f"{what} violated: {lines}")

    def report(self):
        return {"error": self.what, "violations": [v.as_dict() for v in self.violations]}
