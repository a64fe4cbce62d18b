"""Time cut-off evaluation, randomness and growth scales, the randomness/growth
trichotomy, and harnesses for the cost-estimate axioms.
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
from dataclasses import asdict, dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from .complexity import ComplexityTable
from .errors import AxiomViolation, InvalidScales
from .machine import (
    EMPTY,
    BudgetPolicy,
    DEFAULT_POLICY,
    EvalOutcome,
    Halted,
    Program,
    ProvenDivergent,
    Unknown,
    compose_hygienic,
    compose_raw,
    eval_fn,
    in_domain,
    parallel_eval,
    random_program,
    run,
)

# -- cut-off policy ------------------------------------------------------------------


@dataclass(frozen=True)
class CutoffPolicy:
    """Step budget ``ceil(c * x**exponent)`` for input ``x``."""

    c: Fraction
    exponent: int = 2
    space_budget: int = 4_096

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", Fraction(self.c))
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.exponent < 0:
            raise ValueError("exponent must be a natural")

    def budget_of(self, x: int) -> int:
        return max(1, math.ceil(self.c * x**self.exponent))


def cutoff_run(p: Program, x: int, policy: CutoffPolicy) -> EvalOutcome:
    """Run under the cut-off; ``Unknown`` is the "not determined at x" verdict."""
    return run(p, x, policy.budget_of(x), policy.space_budget)


def classify(outcome: EvalOutcome) -> str:
    if isinstance(outcome, Halted):
        return "halted"
    if isinstance(outcome, ProvenDivergent):
        return "divergent"
    return "unknown"


@dataclass(frozen=True)
class ScanRow:
    c: Fraction
    exponent: int
    x: int
    budget: int
    halted: int
    divergent: int
    unknown: int
    super_halted: int  # halted within the reference super-budget
    halted_fraction: Fraction | None  # of super_halted, the share halting within budget

    @property
    def total(self) -> int:
        return self.halted + self.divergent + self.unknown


CSV_COLUMNS = ("c", "exponent", "x", "budget", "programs", "halted", "divergent", "unknown",
               "super_halted", "halted_fraction")


@dataclass
class ScanReport:
    programs: int
    super_budget: int
    rows: list[ScanRow] = field(default_factory=list)

    def row(self, c, x: int) -> ScanRow:
        c = Fraction(c)
        for r in self.rows:
            if r.c == c and r.x == x:
                return r
        raise KeyError((c, x))

    def to_dict(self) -> dict:
        return {
            "programs": self.programs,
            "super_budget": self.super_budget,
            "rows": [
                {
                    "c": str(r.c),
                    "exponent": r.exponent,
                    "x": r.x,
                    "budget": r.budget,
                    "programs": r.total,
                    "halted": r.halted,
                    "divergent": r.divergent,
                    "unknown": r.unknown,
                    "super_halted": r.super_halted,
                    "halted_fraction": None if r.halted_fraction is None else str(r.halted_fraction),
                }
                for r in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.to_dict()["rows"]:
            writer.writerow(["" if row[k] is None else row[k] for k in CSV_COLUMNS])
        return buf.getvalue()


def cutoff_scan(programs: Iterable[Program], inputs: Iterable[int],
                policies: CutoffPolicy | Sequence[CutoffPolicy], super_budget: int) -> ScanReport:
    """Count outcome classes per input and per cut-off policy.

    The reference run at ``super_budget`` tells which programs halt at all
    (as far as the desk can see); each row reports what share of those the
    cut-off budget catches. An empty program set yields a report with no rows.
    """
    programs = list(programs)
    inputs = list(inputs)
    if isinstance(policies, CutoffPolicy):
        policies = [policies]
    space = policies[0].space_budget if policies else DEFAULT_POLICY.space_budget
    report = ScanReport(len(programs), super_budget)
    if not programs:
        return report
    reference = {
        x: [isinstance(run(p, x, super_budget, space), Halted) for p in programs] for x in inputs
    }
    for policy in policies:
        for x in inputs:
            counts = {"halted": 0, "divergent": 0, "unknown": 0}
            caught = 0
            for p, ref in zip(programs, reference[x]):
                kind = classify(cutoff_run(p, x, policy))
                counts[kind] += 1
                caught += ref and kind == "halted"
            supers = sum(reference[x])
            report.rows.append(ScanRow(
                policy.c, policy.exponent, x, policy.budget_of(x),
                counts["halted"], counts["divergent"], counts["unknown"], supers,
                Fraction(caught, supers) if supers else None,
            ))
    return report


# -- scales ------------------------------------------------------------------------


def log_scale(x: float) -> float:
    return math.log(x + 2)


def power_growth(x: float) -> float:
    return (x + 1) ** 1.5


def _sample_points(x0: int, ceiling: int) -> list[int]:
    # every integer near the threshold, then a geometric grid with neighbours
    pts = set(range(x0, min(ceiling, x0 + 10_000) + 1))
    x = float(max(x0, 1))
    while x < ceiling:
        xi = int(x)
        pts.update((xi, xi + 1))
        x *= 1.01
    pts.add(ceiling)
    return sorted(p for p in pts if x0 <= p <= ceiling)


def _scale_failure(phi, psi, points: Sequence[int]) -> tuple[int, str] | None:
    def conditions(x):
        ps = psi(x)
        return phi(x), x / phi(x), ps, ps / (x * phi(ps))

    names = ("phi", "x/phi(x)", "psi", "psi(x)/(x*phi(psi(x)))")
    prev = None
    for x in points:
        cur = conditions(x)
        if min(cur[0], cur[2]) <= 0:
            raise InvalidScales(f"scales must be positive, failed at x={x}")
        if prev is not None:
            for name, a, b in zip(names, prev[1], cur):
                if not b > a:
                    return prev[0], name
        prev = (x, cur)
    return None


@dataclass(frozen=True)
class ScalePair:
    """Randomness scale ``phi`` and growth scale ``psi``, valid from ``x0`` on."""

    phi: Callable[[float], float]
    psi: Callable[[float], float]
    x0: int

    def validate(self, ceiling: int = 10**6) -> ScalePair:
        """Check the monotonicity conditions pointwise on ``x0..ceiling``."""
        bad = _scale_failure(self.phi, self.psi, _sample_points(self.x0, ceiling))
        if bad:
            x, name = bad
            raise InvalidScales(f"{name} is not increasing after x={x} (x0={self.x0})")
        return self


def scale_threshold(phi, psi, search: int = 10_000) -> int:
    """Smallest integer x0 after which every monotonicity condition holds on ``x0..search``."""
    x0 = 1
    while True:
        bad = _scale_failure(phi, psi, range(x0, search + 1))
        if bad is None:
            return x0
        x0 = bad[0] + 1
        if x0 >= search:
            raise InvalidScales("no threshold below the search limit")


@lru_cache(maxsize=1)
def default_scales() -> ScalePair:
    """``phi(x) = log(x+2)``, ``psi(x) = (x+1)**1.5`` with the computed threshold."""
    return ScalePair(log_scale, power_growth, scale_threshold(log_scale, power_growth))


# -- randomness ---------------------------------------------------------------------


class PhiVerdict(Enum):
    RANDOM = "random"  # certified
    NOT_RANDOM = "not-random"
    UNKNOWN = "unknown"


def is_phi_random(x: int, table: ComplexityTable, phi: Callable[[float], float]) -> PhiVerdict:
    """An upper bound can refute randomness; only a certified value can confirm it."""
    threshold = x / phi(x)
    upper = table.upper_bound(x)
    if upper is not None and upper <= threshold:
        return PhiVerdict.NOT_RANDOM
    if table.is_certified(x):
        return PhiVerdict.RANDOM
    return PhiVerdict.UNKNOWN


class Branch(Enum):
    SMALL_VALUE = "i"
    DIVERGES = "ii"
    NOT_RANDOM = "iii"


@dataclass(frozen=True)
class TrichotomyRecord:
    x: int
    branch: Branch
    certainty: str  # "certified" | "upper-bound-only"
    value: int | None = None
    complexity_bound: int | None = None  # C^T(f(x)) for branch (iii)
    randomness_bound: float | None = None  # f(x) / phi(f(x)) for branch (iii)

    @property
    def bound_holds(self) -> bool | None:
        """Whether ``C(f(x)) <= f(x)/phi(f(x))`` holds on this record (branch iii only)."""
        if self.branch is not Branch.NOT_RANDOM:
            return None
        return self.complexity_bound is not None and self.complexity_bound <= self.randomness_bound


@dataclass
class TrichotomyReport:
    records: list[TrichotomyRecord] = field(default_factory=list)
    unresolved: list[tuple[int, str]] = field(default_factory=list)
    below_threshold: list[int] = field(default_factory=list)

    def branch_counts(self) -> dict[str, int]:
        out = {b.value: 0 for b in Branch}
        for rec in self.records:
            out[rec.branch.value] += 1
        return out


def trichotomy_classify(p: Program, inputs: Iterable[int], scales: ScalePair,
                        table: ComplexityTable, policy: BudgetPolicy = DEFAULT_POLICY,
                        ceiling: int = 10**6) -> TrichotomyReport:
    """Assign one branch of the randomness/growth trichotomy to each certified input.

    Branch order: outside the domain, then small value, then non-random
    value. Inputs whose run is Unknown, or whose large value the table cannot
    show to be non-random, land in ``unresolved``; inputs below ``x0`` are
    listed in ``below_threshold`` and not classified.
    """
    inputs = list(inputs)
    scales.validate(max(ceiling, max(inputs, default=1)))
    report = TrichotomyReport()
    for x in inputs:
        if x < scales.x0:
            report.below_threshold.append(x)
            continue
        out = eval_fn(p, x, policy)
        if isinstance(out, Unknown):
            report.unresolved.append((x, "run exhausted its budget"))
            continue
        if not in_domain(out):
            report.records.append(TrichotomyRecord(x, Branch.DIVERGES, "certified"))
            continue
        fx = out.value
        if fx <= scales.psi(x):
            report.records.append(TrichotomyRecord(x, Branch.SMALL_VALUE, "certified", fx))
            continue
        bound = fx / scales.phi(fx)
        upper = table.upper_bound(fx)
        if upper is not None and upper <= bound:
            certainty = "certified" if table.is_certified(fx) else "upper-bound-only"
            report.records.append(
                TrichotomyRecord(x, Branch.NOT_RANDOM, certainty, fx, upper, bound)
            )
        else:
            report.unresolved.append((x, f"table cannot refute randomness of f(x)={fx}"))
    return report


# -- runtime complexity ---------------------------------------------------------------


@dataclass(frozen=True)
class CostFit:
    c: Fraction | None  # None when some point has no table entry
    witness: int | None  # input attaining c
    points: int
    zero_cost: int  # skipped: cost 0 is not a positive natural
    missing: tuple[int, ...]  # inputs whose cost value lies beyond the table


def runtime_complexity_scan(p: Program, inputs: Iterable[int], table: ComplexityTable,
                            policy: BudgetPolicy = DEFAULT_POLICY) -> dict[str, CostFit]:
    """Smallest ``c`` with ``C^T(cost(x)) <= c * x`` over halting inputs, per cost."""
    samples = []
    for x in inputs:
        out = eval_fn(p, x, policy)
        if isinstance(out, Halted):
            samples.append((x, out.cost))
    report = {}
    for name in ("t", "m", "s"):
        best: Fraction | None = Fraction(0)
        witness = None
        zero = 0
        missing = []
        points = 0
        for x, cost in samples:
            v = getattr(cost, name)
            if v == 0:
                zero += 1
                continue
            points += 1
            upper = table.upper_bound(v)
            if upper is None:
                missing.append(x)
                continue
            ratio = Fraction(upper, x)
            if ratio > best:
                best, witness = ratio, x
        if missing:
            best = None
        report[name] = CostFit(best if points else None, witness, points, zero, tuple(missing))
    return report


# -- cost-estimate axioms ---------------------------------------------------------------


@dataclass
class AxiomReport:
    domain_checked: int = 0
    composition_checked: int = 0
    parallel_checked: int = 0
    skipped: int = 0


def check_composition(q: Program, r: Program, x: int, policy: BudgetPolicy = DEFAULT_POLICY) -> bool:
    """Check axioms (i) and (ii) for ``q ∘ r`` at ``x``; False if the sample is unusable.

    ``r`` must be hygienic at ``x`` and produce a positive value.
    """
    first = eval_fn(r, x, policy)
    whole = eval_fn(compose_raw(q, r), x, policy)
    if isinstance(first, Unknown) or isinstance(whole, Unknown):
        return False
    if not isinstance(first, Halted):
        if isinstance(whole, Halted):
            raise AxiomViolation("(i)", {"q": str(q), "r": str(r), "x": x, "why": "r diverges"})
        return True
    if first.value < 1 or first.scratch():
        return False
    second = eval_fn(q, first.value, policy)
    if isinstance(second, Unknown):
        return False
    if isinstance(second, Halted) != isinstance(whole, Halted):
        raise AxiomViolation("(i)", {"q": str(q), "r": str(r), "x": x})
    if not isinstance(whole, Halted):
        return True
    for name in ("t", "s"):
        lhs = getattr(whole.cost, name)
        rhs = getattr(first.cost, name) + getattr(second.cost, name)
        if lhs != rhs:
            raise AxiomViolation(
                "(ii)", {"cost": name, "q": str(q), "r": str(r), "x": x, "lhs": lhs, "rhs": rhs}
            )
    if whole.value != second.value:
        raise AxiomViolation("(ii)", {"q": str(q), "r": str(r), "x": x, "why": "value mismatch"})
    return True


def check_parallel(spec: Sequence[tuple[Program, int]], policy: BudgetPolicy = DEFAULT_POLICY) -> bool:
    """Axiom (iii): joint time equals the maximum of independently re-run member times."""
    result = parallel_eval(spec, policy)
    if result.joint is None:
        return False
    times = []
    for p, x in spec:
        out = run(p, x, policy.step_budget, policy.space_budget)
        times.append(out.cost.t)
    if result.joint.t != max(times, default=0):
        raise AxiomViolation("(iii)", {"spec": [(str(p), x) for p, x in spec], "joint": result.joint.t})
    return True


def cost_axiom_check(compositions: Iterable[tuple[Program, Program, int]],
                     parallel_specs: Iterable[Sequence[tuple[Program, int]]],
                     policy: BudgetPolicy = DEFAULT_POLICY) -> AxiomReport:
    """Run both harnesses; raises :class:`AxiomViolation` on the first counterexample."""
    report = AxiomReport()
    for q, r, x in compositions:
        if check_composition(q, r, x, policy):
            report.domain_checked += 1
            report.composition_checked += 1
        else:
            report.skipped += 1
    for spec in parallel_specs:
        if check_parallel(spec, policy):
            report.parallel_checked += 1
        else:
            report.skipped += 1
    return report


def sample_compositions(rng: random.Random, count: int, max_size: int = 4,
                        policy: BudgetPolicy = DEFAULT_POLICY, max_input: int = 20):
    """``count`` triples ``(q, r, x)`` with ``r`` hygienic and both stages halting.

    ``r`` is a random program followed by its cleanup block, so it is
    hygienic by construction.
    """
    out = []
    while len(out) < count:
        r = compose_hygienic(EMPTY, random_program(rng, rng.randint(0, max_size)))
        q = random_program(rng, rng.randint(0, max_size))
        x = rng.randint(1, max_input)
        first = eval_fn(r, x, policy)
        if not isinstance(first, Halted) or first.value < 1:
            continue
        if not isinstance(eval_fn(q, first.value, policy), Halted):
            continue
        out.append((q, r, x))
    return out


def sample_parallel_specs(rng: random.Random, count: int, members: int = 4, max_size: int = 4,
                          policy: BudgetPolicy = DEFAULT_POLICY, max_input: int = 20):
    """Random specs whose members all halt."""
    out = []
    while len(out) < count:
        spec = []
        while len(spec) < members:
            p = random_program(rng, rng.randint(0, max_size))
            x = rng.randint(1, max_input)
            if isinstance(eval_fn(p, x, policy), Halted):
                spec.append((p, x))
        out.append(spec)
    return out


def record_dict(rec: TrichotomyRecord) -> dict:
    d = asdict(rec)
    d["branch"] = rec.branch.value
    return d
