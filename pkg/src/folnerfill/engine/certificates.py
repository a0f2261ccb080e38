"""Fill certificates: a filling, exact norms, the bound it must meet, and the verdict."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

from ..chains import Chain


class CapExceeded(RuntimeError):
    """No box up to the configured cap meets the target."""

    def __init__(self, message: str, best_k: int, best_value: Fraction):
        super().__init__(message)
        self.best_k = best_k
        self.best_value = best_value


@dataclass
class Check:
    name: str
    lhs: Fraction
    rhs: Fraction
    relation: str = "<="
    formula: str = ""

    @property
    def holds(self) -> bool:
        if self.relation == "<=":
            return self.lhs <= self.rhs
        if self.relation == "<":
            return self.lhs < self.rhs
        if self.relation == "==":
            return self.lhs == self.rhs
        raise ValueError(self.relation)

    def to_json(self) -> dict:
        return {"name": self.name, "lhs": str(self.lhs), "relation": self.relation,
                "rhs": str(self.rhs), "formula": self.formula, "holds": self.holds}


@dataclass
class FillCertificate:
    kind: str
    cycle: Chain
    filling: Chain
    bound: Fraction
    bound_formula: str
    boundary_ok: bool
    checks: List[Check] = field(default_factory=list)
    params: Dict[str, Any] = field(default_factory=dict)
    target: Optional[Chain] = None  # what d(filling) must equal when it is not the cycle itself

    @property
    def norm_cycle(self) -> Fraction:
        return self.cycle.norm()

    @property
    def norm_filling(self) -> Fraction:
        return self.filling.norm()

    @property
    def verified(self) -> bool:
        return self.boundary_ok and self.norm_filling <= self.bound and all(c.holds for c in self.checks)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "norm_cycle": str(self.norm_cycle),
            "norm_filling": str(self.norm_filling),
            "bound": str(self.bound),
            "verified": self.verified,
        }

    def to_json(self, include_chains: bool = True) -> dict:
        from ..serialize import chain_to_json, jsonable

        out = {
            "kind": self.kind,
            "norm_cycle": str(self.norm_cycle),
            "norm_filling": str(self.norm_filling),
            "bound": str(self.bound),
            "bound_formula": self.bound_formula,
            "boundary_ok": self.boundary_ok,
            "verified": self.verified,
            "checks": [c.to_json() for c in self.checks],
            "params": jsonable(self.params),
        }
        if include_chains:
            out["cycle"] = chain_to_json(self.cycle)
            out["filling"] = chain_to_json(self.filling)
            if self.target is not None:
                out["target"] = chain_to_json(self.target)
        return out
