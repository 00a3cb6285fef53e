"""Immutable records of an evaluated inequality chain."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

SLACK = 1e-9
TIGHTNESS_TOL = 1e-9


def slack_for(values: Sequence[float], slack_scale: float = 1.0) -> float:
    """Additive slack ``1e-9 * (1 + max |v|)``, multiplied by ``slack_scale``."""
    return SLACK * slack_scale * (1.0 + max((abs(v) for v in values), default=0.0))


def _finite_or_none(v: float):
    return v if math.isfinite(v) else None


def _tightness(lhs: float, final: float, slack: float) -> float:
    if final > slack:
        return lhs / final
    # Both sides are below the slack: keep the ratio while it is meaningful,
    # otherwise the bound has degenerated to zero.
    if final > 0.0 and lhs <= final * (1.0 + TIGHTNESS_TOL):
        return lhs / final
    return 0.0 if lhs <= slack else math.inf


@dataclass(frozen=True)
class BoundCertificate:
    """``lhs <= rhs_chain[0] <= rhs_chain[1] <= ...`` evaluated on one instance.

    ``passed`` holds iff every adjacent pair is ordered within ``slack``.
    ``tightness`` is ``lhs / rhs_chain[-1]``.  When the final bound is below the
    slack the ratio is kept only if it does not exceed ``1 + 1e-9``; otherwise
    tightness is 0 for a vanishing ``lhs`` and infinite for a nonzero one.  ``details``
    carries intermediate quantities that are not part of the chain.
    """

    name: str
    lhs: float
    rhs_chain: tuple[float, ...]
    slack: float
    passed: bool
    tightness: float
    radii: tuple[float, ...] = ()
    details: Mapping[str, float] = field(default_factory=dict)

    @classmethod
    def evaluate(
        cls,
        name: str,
        lhs: float,
        rhs_chain: Sequence[float],
        *,
        slack_scale: float = 1.0,
        radii: Sequence[float] = (),
        details: Mapping[str, float] | None = None,
    ) -> "BoundCertificate":
        lhs = float(lhs)
        chain = tuple(float(v) for v in rhs_chain)
        slack = slack_for((lhs, *chain), slack_scale)
        links = (lhs, *chain)
        passed = all(lo <= hi + slack for lo, hi in zip(links, links[1:]))
        return cls(
            name=name,
            lhs=lhs,
            rhs_chain=chain,
            slack=slack,
            passed=passed,
            tightness=_tightness(lhs, chain[-1], slack),
            radii=tuple(float(r) for r in radii),
            details=dict(details or {}),
        )

    @property
    def monotone(self) -> bool:
        """Whether the right-hand links are nondecreasing within slack."""
        c = self.rhs_chain
        return all(lo <= hi + self.slack for lo, hi in zip(c, c[1:]))

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs_chain": list(self.rhs_chain),
            "slack": self.slack,
            "pass": self.passed,
            "tightness": _finite_or_none(self.tightness),
            "radii": list(self.radii),
            "details": dict(self.details),
        }


@dataclass(frozen=True)
class TransformCertificate:
    """Error of a mean-based transform approximation against its bound."""

    name: str
    exact: Any
    approx: Any
    error: float
    bound: float
    slack: float
    passed: bool
    radius: float = 0.0

    @classmethod
    def evaluate(cls, name, exact, approx, error, bound, *, slack_scale=1.0, radius=0.0):
        error, bound = float(error), float(bound)
        slack = slack_for((error, bound), slack_scale)
        return cls(name, exact, approx, error, bound, slack, error <= bound + slack, float(radius))

    @property
    def tightness(self) -> float:
        return _tightness(self.error, self.bound, self.slack)

    def as_bound(self) -> BoundCertificate:
        return BoundCertificate(
            self.name, self.error, (self.bound,), self.slack, self.passed, self.tightness, (self.radius,)
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "error": self.error,
            "bound": self.bound,
            "slack": self.slack,
            "pass": self.passed,
            "tightness": _finite_or_none(self.tightness),
            "radius": self.radius,
        }
