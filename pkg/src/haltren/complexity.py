"""Desk-scale natural complexity: the universal evaluator, budgeted sweeps and
the Kolmogorov order.

The evaluator ``u`` sends ``y`` to ``(k, j) = N_R^{-1}(y)``, decodes program
``j`` and runs it on input ``k``. A sweep over ``y = 1..K_max`` records the
first hit of every output value; an entry is certified exact only when every
smaller index was resolved (halted or proven divergent).
"""

from __future__ import annotations

import fcntl
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from .errors import CacheMismatch, EmptyCertifiedSet
from .machine import Halted, ProvenDivergent, alphabet_hash, decode_program, run
from .numberings import R_LINEAR, R_POW2, RSequence, nr_numbering

CACHE_FORMAT = "haltren-complexity"
CACHE_VERSION = 1
CACHE_ENV = "HALTREN_CACHE_DIR"

R_REGISTRY: dict[str, RSequence] = {R_POW2.name: R_POW2, R_LINEAR.name: R_LINEAR}


def decode_index(y: int, R: RSequence = R_POW2):
    """``y -> (input k, program code j, Decoded)``."""
    k, j = nr_numbering(R).unnumber(y)
    return k, j, decode_program(j)


def universal_u(y: int, step_budget: int, space_budget: int, R: RSequence = R_POW2):
    """Evaluate the universal map at ``y``; returns an EvalOutcome."""
    k, _, decoded = decode_index(y, R)
    return run(decoded.program, k, step_budget, space_budget)


@dataclass(frozen=True)
class SweepRecord:
    y: int
    k: int  # input
    j: int  # program code
    status: str  # "halted" | "divergent" | "unknown"
    value: int | None
    steps: int
    canonical: bool = True

    @property
    def resolved(self) -> bool:
        return self.status != "unknown"


def sweep_record(y: int, step_budget: int, space_budget: int, R: RSequence = R_POW2) -> SweepRecord:
    k, j, decoded = decode_index(y, R)
    out = run(decoded.program, k, step_budget, space_budget)
    if isinstance(out, Halted):
        return SweepRecord(y, k, j, "halted", out.value, out.cost.t, decoded.canonical)
    if isinstance(out, ProvenDivergent):
        return SweepRecord(y, k, j, "divergent", None, out.cycle_start_step + out.period,
                           decoded.canonical)
    return SweepRecord(y, k, j, "unknown", None, step_budget, decoded.canonical)


@dataclass(frozen=True)
class ComplexityEntry:
    upper: int  # C^T(x): first index hitting x
    certified: bool


@dataclass
class ComplexityTable:
    budget: int
    space_budget: int
    k_max: int
    r_name: str
    records: list[SweepRecord]
    entries: dict[int, ComplexityEntry] = field(default_factory=dict)
    resolved_prefix: int = 0
    total_steps: int = 0

    @classmethod
    def from_records(cls, budget, space_budget, k_max, r_name, records) -> ComplexityTable:
        records = sorted(records, key=lambda r: r.y)
        if [r.y for r in records] != list(range(1, len(records) + 1)):
            raise ValueError("sweep records must cover 1..K_max without gaps")
        table = cls(budget, space_budget, k_max, r_name, records)
        resolved = 0
        for rec in records:
            if not rec.resolved:
                break
            resolved = rec.y
        table.resolved_prefix = resolved
        hits: dict[int, int] = {}
        for rec in records:
            table.total_steps += rec.steps
            if rec.status == "halted" and rec.value >= 1 and rec.value not in hits:
                hits[rec.value] = rec.y
        table.entries = {x: ComplexityEntry(y, y <= resolved) for x, y in sorted(hits.items())}
        return table

    def upper_bound(self, x: int) -> int | None:
        e = self.entries.get(x)
        return e.upper if e else None

    def is_certified(self, x: int) -> bool:
        e = self.entries.get(x)
        return bool(e and e.certified)

    def complexity(self, x: int) -> int:
        e = self.entries.get(x)
        if not (e and e.certified):
            raise KeyError(f"C_u({x}) is not certified by this table")
        return e.upper

    def certified_values(self) -> list[int]:
        return [x for x, e in self.entries.items() if e.certified]

    def certified_prefix(self) -> int:
        """Largest X such that every x in 1..X is certified."""
        x = 0
        while self.is_certified(x + 1):
            x += 1
        return x


# -- persistence -----------------------------------------------------------------


def cache_dir(override: str | os.PathLike | None = None) -> Path:
    if override is not None:
        return Path(override)
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "haltren"


def cache_path(directory: Path, budget: int, space_budget: int, r_name: str) -> Path:
    return Path(directory) / f"complexity-{r_name}-T{budget}-S{space_budget}.jsonl"


def _header(budget: int, space_budget: int, r_name: str, count: int) -> dict:
    return {
        "format": CACHE_FORMAT,
        "version": CACHE_VERSION,
        "alphabet": alphabet_hash(),
        "budget": budget,
        "space_budget": space_budget,
        "R": r_name,
        "records": count,
    }


def load_cache(path: Path, budget: int, space_budget: int, r_name: str) -> list[SweepRecord]:
    """Read cached records; raise CacheMismatch on a foreign or stale manifest."""
    if not path.exists():
        return []
    with open(path) as fh:
        first = fh.readline()
        try:
            head = json.loads(first)
        except json.JSONDecodeError:
            raise CacheMismatch(f"{path}: unreadable manifest") from None
        expected = _header(budget, space_budget, r_name, 0)
        for key in ("format", "version", "alphabet", "budget", "space_budget", "R"):
            if head.get(key) != expected[key]:
                raise CacheMismatch(
                    f"{path}: manifest {key}={head.get(key)!r}, expected {expected[key]!r}"
                )
        out = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                out.append(SweepRecord(**json.loads(line)))
            except (json.JSONDecodeError, TypeError):
                break  # truncated tail from an interrupted writer
    if len(out) < head.get("records", 0):
        raise CacheMismatch(f"{path}: manifest promises {head['records']} records, found {len(out)}")
    return out[: head.get("records", len(out))]


def write_cache(path: Path, records: list[SweepRecord], budget: int, space_budget: int,
                r_name: str) -> None:
    """Atomically replace the cache file (write to a temp file, then rename)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(json.dumps(_header(budget, space_budget, r_name, len(records)), sort_keys=True) + "\n")
        for rec in records:
            row = {k: v for k, v in asdict(rec).items()}
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    os.replace(tmp, path)


class _WriterLock:
    def __init__(self, path: Path) -> None:
        self.path = path.with_suffix(path.suffix + ".lock")

    def __enter__(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.fh = open(self.path, "w")
        fcntl.flock(self.fh, fcntl.LOCK_EX)
        return self

    def __exit__(self, *exc):
        fcntl.flock(self.fh, fcntl.LOCK_UN)
        self.fh.close()


# -- sweeping ----------------------------------------------------------------------


def _sweep_chunk(ys: list[int], budget: int, space_budget: int, r_name: str) -> list[SweepRecord]:
    R = R_REGISTRY[r_name]
    return [sweep_record(y, budget, space_budget, R) for y in ys]


def sweep(ys: Iterable[int], budget: int, space_budget: int, r_name: str = "pow2",
          workers: int = 1, chunk: int = 512) -> list[SweepRecord]:
    """Run the universal evaluator over ``ys``; output is sorted by ``y``.

    With ``workers > 1`` chunks run in separate processes; the merge sorts by
    index so completion order never matters.
    """
    ys = list(ys)
    if workers <= 1 or len(ys) <= chunk:
        return _sweep_chunk(ys, budget, space_budget, r_name)
    parts = [ys[i:i + chunk] for i in range(0, len(ys), chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_sweep_chunk, part, budget, space_budget, r_name) for part in parts]
        records = [rec for fut in futures for rec in fut.result()]
    return sorted(records, key=lambda r: r.y)


def complexity_table(T: int, K_max: int, *, space_budget: int = 4_096, R: RSequence = R_POW2,
                     cache: str | os.PathLike | None = None, workers: int = 1,
                     rebuild: bool = False) -> ComplexityTable:
    """Sweep ``y = 1..K_max`` at step budget ``T`` and tabulate first hits.

    ``cache`` names a directory holding resumable JSON-lines sweeps. A cache
    with a mismatching manifest raises :class:`CacheMismatch` unless
    ``rebuild`` is set.
    """
    if T < 1 or K_max < 1:
        raise ValueError("T and K_max must be >= 1")
    if cache is None:
        records = sweep(range(1, K_max + 1), T, space_budget, R.name, workers)
        return ComplexityTable.from_records(T, space_budget, K_max, R.name, records)
    path = cache_path(Path(cache), T, space_budget, R.name)
    with _WriterLock(path):
        try:
            have = load_cache(path, T, space_budget, R.name)
        except CacheMismatch:
            if not rebuild:
                raise
            have = []
        have = [r for r in have if r.y <= max(K_max, len(have))]
        if len(have) < K_max:
            have += sweep(range(len(have) + 1, K_max + 1), T, space_budget, R.name, workers)
            write_cache(path, have, T, space_budget, R.name)
    return ComplexityTable.from_records(T, space_budget, K_max, R.name, have[:K_max])


# -- Kolmogorov order ------------------------------------------------------------------


@dataclass
class KOrderTable:
    """Ranking of certified values by increasing complexity (ties: by value)."""

    order: list[int]
    rank: dict[int, int]
    complexity: dict[int, int]

    @classmethod
    def from_complexities(cls, complexity: dict[int, int]) -> KOrderTable:
        order = sorted(complexity, key=lambda x: (complexity[x], x))
        return cls(order, {x: i + 1 for i, x in enumerate(order)}, dict(complexity))

    @classmethod
    def identity(cls, n: int) -> KOrderTable:
        return cls.from_complexities({x: x for x in range(1, n + 1)})

    def K(self, x: int) -> int:
        return self.rank[x]

    def inverse(self, n: int) -> int:
        return self.order[n - 1]

    def __contains__(self, x: int) -> bool:
        return x in self.rank

    def __len__(self) -> int:
        return len(self.order)

    def c0(self) -> Fraction:
        """Best constant with ``c0 * C_u(x) <= K(x)`` on the table."""
        return min(Fraction(self.rank[x], self.complexity[x]) for x in self.order)


def kolmogorov_order(table: ComplexityTable) -> KOrderTable:
    certified = {x: e.upper for x, e in table.entries.items() if e.certified}
    if not certified:
        raise EmptyCertifiedSet("no certified entries in the complexity table")
    korder = KOrderTable.from_complexities(certified)
    for x in korder.order:
        if korder.K(x) > certified[x]:
            raise AssertionError(f"K({x}) = {korder.K(x)} exceeds C_u({x}) = {certified[x]}")
    return korder
