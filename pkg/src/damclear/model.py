"""Domain types for two-sided day-ahead auctions with non-convex bids.

An instance holds stepwise bid curves grouped per participant.  A participant
("bid group") owns a commitment decision: when committed, every step obeys its
minimum acceptance ratio and the group's ramp limits; a fixed cost is incurred
once.  Quantities are stored as positive magnitudes plus a side flag; the
signed convention (demand positive, supply negative) lives in one place,
:func:`signed_quantity`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Tuple

SUPPLY = "supply"
DEMAND = "demand"
SIDES = (SUPPLY, DEMAND)


@dataclass(frozen=True)
class BidStep:
    """One step of a stepwise bid curve in a single period."""

    id: str
    period: int
    quantity_mw: float
    price: float
    min_ratio: float = 0.0


@dataclass(frozen=True)
class BidGroup:
    """A participant: a family of bid steps under one commitment decision."""

    id: str
    side: str
    convex: bool
    fixed_cost: float
    ramp_up_mw: Optional[float]
    ramp_down_mw: Optional[float]
    location: str
    steps: Tuple[BidStep, ...]

    def steps_in_period(self, t: int) -> Tuple[BidStep, ...]:
        return tuple(s for s in self.steps if s.period == t)


@dataclass(frozen=True)
class TransmissionLine:
    """ATC-style line: one bounded flow variable per period.

    Positive flow means power moving from `from_location` to `to_location`.
    """

    from_location: str
    to_location: str
    capacity_mw: float


@dataclass(frozen=True)
class Instance:
    periods: int
    locations: Tuple[str, ...]
    lines: Tuple[TransmissionLine, ...]
    participants: Tuple[BidGroup, ...]

    def participant(self, pid: str) -> BidGroup:
        for p in self.participants:
            if p.id == pid:
                return p
        raise KeyError(pid)

    @property
    def non_convex(self) -> Tuple[BidGroup, ...]:
        return tuple(p for p in self.participants if not p.convex)

    @property
    def step_count(self) -> int:
        return sum(len(p.steps) for p in self.participants)


@dataclass(frozen=True)
class PriceSystem:
    """Commodity prices per (period, location), commitment prices per participant.

    `delta` is None for pricing rules that do not produce commitment prices.
    """

    pi: Mapping[Tuple[int, str], float]
    delta: Optional[Mapping[str, float]] = None

    def price(self, period: int, location: str) -> float:
        key = (period, location)
        if key not in self.pi:
            raise KeyError(f"no commodity price for period {period} at {location!r}")
        return self.pi[key]


@dataclass(frozen=True)
class DispatchSolution:
    """Accepted commitment/fraction decisions plus the realized welfare.

    `x` is keyed by (participant id, step id); `flows` by (line index, period).
    """

    u: Mapping[str, float]
    x: Mapping[Tuple[str, str], float]
    welfare: float
    flows: Mapping[Tuple[int, int], float] = field(default_factory=dict)


def signed_quantity(step: BidStep, side: str) -> float:
    """Signed MW of a step: positive for demand, negative for supply."""
    if side == DEMAND:
        return step.quantity_mw
    if side == SUPPLY:
        return -step.quantity_mw
    raise ValueError(f"unknown side {side!r}")


@dataclass(frozen=True)
class Violation:
    code: str
    where: str
    message: str

    def __str__(self) -> str:
        return f"{self.where}: {self.message} [{self.code}]"


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def validate_instance(instance: Instance) -> list[Violation]:
    """Check every structural invariant; violations are data, not failures."""
    out: list[Violation] = []
    bad = out.append

    if instance.periods < 1:
        bad(Violation("periods", "instance", f"periods must be >= 1, got {instance.periods}"))
    if len(set(instance.locations)) != len(instance.locations):
        bad(Violation("locations", "instance", "duplicate location ids"))
    known = set(instance.locations)

    for i, line in enumerate(instance.lines):
        where = f"line {i} ({line.from_location}->{line.to_location})"
        if line.from_location == line.to_location:
            bad(Violation("line_loop", where, "endpoints must differ"))
        for end in (line.from_location, line.to_location):
            if end not in known:
                bad(Violation("line_location", where, f"unknown location {end!r}"))
        if not _finite(line.capacity_mw) or line.capacity_mw < 0:
            bad(Violation("line_capacity", where, f"capacity_mw must be >= 0, got {line.capacity_mw}"))

    seen_pids = set()
    for p in instance.participants:
        where = f"participant {p.id}"
        if p.id in seen_pids:
            bad(Violation("dup_participant", where, "duplicate participant id"))
        seen_pids.add(p.id)

        if p.side not in SIDES:
            bad(Violation("side", where, f"side must be supply or demand, got {p.side!r}"))
        if not _finite(p.fixed_cost) or p.fixed_cost < 0:
            bad(Violation("fixed_cost", where, f"fixed_cost must be >= 0, got {p.fixed_cost}"))
        for name, ramp in (("ramp_up_mw", p.ramp_up_mw), ("ramp_down_mw", p.ramp_down_mw)):
            if ramp is not None and (not _finite(ramp) or ramp < 0):
                bad(Violation("ramp", where, f"{name} must be None or >= 0, got {ramp}"))
        if p.location not in known:
            bad(Violation("location", where, f"unknown location {p.location!r}"))

        if p.convex:
            if p.fixed_cost != 0:
                bad(Violation("convex_fixed_cost", where, "convex participant must have zero fixed cost"))
            if p.ramp_up_mw is not None or p.ramp_down_mw is not None:
                bad(Violation("convex_ramp", where, "convex participant must have unbounded ramps"))
            for s in p.steps:
                if s.min_ratio != 0:
                    bad(Violation("convex_min_ratio", f"step {p.id}/{s.id}",
                                  "convex participant steps must have min_ratio 0"))

        seen_sids = set()
        for s in p.steps:
            swhere = f"step {p.id}/{s.id}"
            if s.id in seen_sids:
                bad(Violation("dup_step", swhere, "duplicate step id within participant"))
            seen_sids.add(s.id)
            if not isinstance(s.period, int) or not 1 <= s.period <= instance.periods:
                bad(Violation("period", swhere, f"period must be in [1, {instance.periods}], got {s.period}"))
            if not _finite(s.quantity_mw) or s.quantity_mw <= 0:
                bad(Violation("quantity", swhere, f"quantity_mw must be > 0, got {s.quantity_mw}"))
            if not _finite(s.price):
                bad(Violation("price", swhere, f"price must be finite, got {s.price}"))
            if not _finite(s.min_ratio) or not 0 <= s.min_ratio <= 1:
                bad(Violation("min_ratio", swhere, f"min_ratio must be in [0, 1], got {s.min_ratio}"))

        # Step prices of one participant form a merit-order curve per period:
        # offer curves rise, demand curves fall (in declared step order).
        for t in range(1, instance.periods + 1):
            steps_t = [s for s in p.steps if s.period == t]
            for a, b in zip(steps_t, steps_t[1:]):
                if p.side == SUPPLY and b.price < a.price:
                    bad(Violation("monotonicity", f"step {p.id}/{b.id}",
                                  f"supply step prices must be non-decreasing in period {t}"))
                if p.side == DEMAND and b.price > a.price:
                    bad(Violation("monotonicity", f"step {p.id}/{b.id}",
                                  f"demand step prices must be non-increasing in period {t}"))

    return out


class InvalidInstanceError(ValueError):
    def __init__(self, violations: Iterable[Violation]):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid instance: {lines}")


def require_valid(instance: Instance) -> Instance:
    violations = validate_instance(instance)
    if violations:
        raise InvalidInstanceError(violations)
    return instance


def zero_dispatch(instance: Instance) -> DispatchSolution:
    """The always-feasible outcome in which nothing clears."""
    return DispatchSolution(
        u={p.id: 0.0 for p in instance.participants},
        x={(p.id, s.id): 0.0 for p in instance.participants for s in p.steps},
        flows={(i, t): 0.0 for i in range(len(instance.lines)) for t in range(1, instance.periods + 1)},
        welfare=0.0,
    )


def instance_welfare(instance: Instance, u: Mapping[str, float],
                     x: Mapping[Tuple[str, str], float]) -> float:
    """Objective value evaluated directly from bid data (independent of any LP)."""
    total = 0.0
    for p in instance.participants:
        for s in p.steps:
            total += s.price * signed_quantity(s, p.side) * x.get((p.id, s.id), 0.0)
        if not p.convex:
            total -= p.fixed_cost * u.get(p.id, 0.0)
    return total


def production_by_period(participant: BidGroup, x: Mapping[Tuple[str, str], float]) -> dict[int, float]:
    """Net production level (-Q x, positive for supply output) per period."""
    prod: dict[int, float] = {}
    for s in participant.steps:
        prod[s.period] = prod.get(s.period, 0.0) + \
            (-signed_quantity(s, participant.side)) * x.get((participant.id, s.id), 0.0)
    return prod


def dispatch_violations(instance: Instance, sol: DispatchSolution, tol: float = 1e-7) -> list[str]:
    """Feasibility report for a dispatch: box, balance and ramp conditions."""
    problems: list[str] = []
    for p in instance.participants:
        u = 1.0 if p.convex else sol.u.get(p.id, 0.0)
        if not p.convex and not -tol <= u <= 1 + tol:
            problems.append(f"u[{p.id}]={u} outside [0, 1]")
        for s in p.steps:
            xv = sol.x.get((p.id, s.id), 0.0)
            if xv < s.min_ratio * u - tol or xv > u + tol:
                problems.append(f"x[{p.id}/{s.id}]={xv} outside [{s.min_ratio}*u, u] with u={u}")
        prod = production_by_period(p, sol.x)
        for t in range(1, instance.periods):
            delta = prod.get(t + 1, 0.0) - prod.get(t, 0.0)
            if p.ramp_up_mw is not None and delta > p.ramp_up_mw * u + tol:
                problems.append(f"ramp-up of {p.id} violated between {t} and {t + 1}: {delta}")
            if p.ramp_down_mw is not None and -delta > p.ramp_down_mw * u + tol:
                problems.append(f"ramp-down of {p.id} violated between {t} and {t + 1}: {-delta}")

    for t in range(1, instance.periods + 1):
        for loc in instance.locations:
            net = 0.0
            for p in instance.participants:
                if p.location != loc:
                    continue
                for s in p.steps:
                    if s.period == t:
                        net += signed_quantity(s, p.side) * sol.x.get((p.id, s.id), 0.0)
            for i, line in enumerate(instance.lines):
                f = sol.flows.get((i, t), 0.0)
                if line.from_location == loc:
                    net += f
                if line.to_location == loc:
                    net -= f
            if abs(net) > tol:
                problems.append(f"balance violated at ({t}, {loc}): residual {net}")

    for i, line in enumerate(instance.lines):
        for t in range(1, instance.periods + 1):
            f = sol.flows.get((i, t), 0.0)
            if abs(f) > line.capacity_mw + tol:
                problems.append(f"flow on line {i} in period {t} exceeds capacity: {f}")

    return problems
