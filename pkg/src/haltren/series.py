"""Generating series attached to halting: truncations, reconstruction, the
function-to-permutation reduction, bounded shifts, finite-orbit closed forms,
the Kolmogorov-ordered series and a three-way series classifier.

All coefficients are exact :class:`~fractions.Fraction` values. Floats appear
only in classifier diagnostics.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Callable, Mapping

from .complexity import KOrderTable
from .errors import (
    InconclusiveSeries,
    InfiniteOrbitWithinWindow,
    MalformedSeries,
    OutsideCertifiedPrefix,
    UncertifiedInput,
)
from .machine import DEFAULT_POLICY, BudgetPolicy, EvalOutcome, Program, Unknown, eval_fn, in_domain

# -- extended functions ---------------------------------------------------------------


@dataclass
class ExtendedFn:
    """``f_p`` extended by 0 off its domain, answered only on certified inputs."""

    program: Program
    policy: BudgetPolicy = DEFAULT_POLICY
    _cache: dict[int, EvalOutcome] = field(default_factory=dict, repr=False)

    def outcome(self, x: int) -> EvalOutcome:
        if x not in self._cache:
            self._cache[x] = eval_fn(self.program, x, self.policy)
        return self._cache[x]

    def is_certified(self, x: int) -> bool:
        return not isinstance(self.outcome(x), Unknown)

    def halts(self, x: int) -> bool:
        """Certified membership in the domain; raises on Unknown."""
        out = self.outcome(x)
        if isinstance(out, Unknown):
            raise UncertifiedInput(x, f"budget {out.budget} exhausted")
        return in_domain(out)

    def bar_f(self, x: int) -> int:
        return self.outcome(x).value if self.halts(x) else 0


# -- truncations ----------------------------------------------------------------------


@dataclass(frozen=True)
class SeriesTruncation:
    """Coefficients ``c_start .. c_N`` of a power series in ``z``."""

    coefficients: tuple[Fraction, ...]
    start: int = 0
    provenance: str = ""

    @property
    def horizon(self) -> int:
        return self.start + len(self.coefficients) - 1

    def coeff(self, n: int) -> Fraction:
        if n > self.horizon:
            raise IndexError(f"coefficient {n} beyond horizon {self.horizon}")
        return self.coefficients[n - self.start] if n >= self.start else Fraction(0)

    def as_map(self) -> dict[int, Fraction]:
        return {self.start + i: c for i, c in enumerate(self.coefficients)}

    def to_dict(self) -> dict:
        return {
            "kind": "dense",
            "provenance": self.provenance,
            "start": self.start,
            "horizon": self.horizon,
            "coefficients": [fraction_str(c) for c in self.coefficients],
        }


@dataclass(frozen=True)
class SparseSeries:
    """``constant + sum coeff * z^exponent`` with finitely many listed exponents."""

    constant: Fraction
    terms: Mapping[int, Fraction]
    provenance: str = ""

    @property
    def horizon(self) -> int:
        return max(self.terms, default=0)

    def as_map(self) -> dict[int, Fraction]:
        out = {0: self.constant} if self.constant else {}
        for e, c in self.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return out

    def to_dict(self) -> dict:
        return {
            "kind": "sparse",
            "provenance": self.provenance,
            "constant": fraction_str(self.constant),
            "terms": {str(e): fraction_str(c) for e, c in sorted(self.terms.items())},
        }


def fraction_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def parse_fraction(text: str) -> Fraction:
    return Fraction(text)


def psi_coeffs(ef: ExtendedFn, k: int, N: int) -> SeriesTruncation:
    """``c_n = 1 / (1 + n * bar_f(k))**2`` for ``n = 0..N``."""
    if N < 0:
        raise ValueError("horizon must be >= 0")
    v = ef.bar_f(k)
    coeffs = tuple(Fraction(1, (1 + n * v) ** 2) for n in range(N + 1))
    return SeriesTruncation(coeffs, 0, f"psi(k={k})")


class DivergesVerdict:
    """Reconstruction result for an input outside the domain."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "DIVERGES"


DIVERGES = DivergesVerdict()


def reconstruct_f(s: SeriesTruncation) -> int | DivergesVerdict:
    """Recover ``f(k)`` from the linear coefficient: ``sqrt(1/c_1) - 1``."""
    if s.start != 0 or s.horizon < 1:
        raise MalformedSeries("need coefficients c_0 and c_1")
    c0, c1 = s.coefficients[0], s.coefficients[1]
    if c0 != 1:
        raise MalformedSeries(f"c_0 = {c0}, expected 1")
    if c1 == 1:
        if all(c == 1 for c in s.coefficients):
            return DIVERGES
        raise MalformedSeries("c_1 = 1 but later coefficients differ from 1")
    inv = 1 / c1
    if inv.denominator != 1 or isqrt(inv.numerator) ** 2 != inv.numerator:
        raise MalformedSeries(f"1/c_1 = {inv} is not the square of a natural")
    return isqrt(inv.numerator) - 1


# -- permutations ---------------------------------------------------------------------


@dataclass(frozen=True)
class PermutationOracle:
    """A (partial) permutation with its inverse; ``None`` marks "undefined"."""

    apply: Callable
    unapply: Callable
    description: str = ""

    def power(self, k, n: int):
        """``sigma^n(k)``; ``None`` when some step along the way is undefined."""
        step = self.apply if n >= 0 else self.unapply
        x = k
        for _ in range(abs(n)):
            x = step(x)
            if x is None:
                return None
        return x

    def orbit(self, k, lo: int, hi: int) -> dict[int, object]:
        """``{n: sigma^n(k)}`` for ``lo <= n <= hi`` where defined."""
        out = {0: k}
        x = k
        for n in range(1, hi + 1):
            x = self.apply(x)
            if x is None:
                break
            out[n] = x
        x = k
        for n in range(-1, lo - 1, -1):
            x = self.unapply(x)
            if x is None:
                break
            out[n] = x
        return {n: out[n] for n in sorted(out) if lo <= n <= hi}


def identity_permutation() -> PermutationOracle:
    return PermutationOracle(lambda n: n, lambda n: n, "identity")


def _cycles_maps(cycles) -> tuple[dict[int, int], dict[int, int]]:
    fwd: dict[int, int] = {}
    for cyc in cycles:
        for i, a in enumerate(cyc):
            b = cyc[(i + 1) % len(cyc)]
            if a in fwd:
                raise ValueError(f"{a} appears in two cycles")
            fwd[a] = b
    return fwd, {b: a for a, b in fwd.items()}


def cycle_permutation(*cycles) -> PermutationOracle:
    """Finite-support permutation of Z+ from disjoint cycles, e.g. ``(1, 2)``."""
    fwd, back = _cycles_maps(cycles)
    return PermutationOracle(lambda n: fwd.get(n, n), lambda n: back.get(n, n), f"cycles{cycles}")


def random_finite_permutation(rng: random.Random, support: int) -> PermutationOracle:
    """Uniform random permutation of ``{1..support}``, identity elsewhere."""
    image = list(range(1, support + 1))
    rng.shuffle(image)
    fwd = dict(zip(range(1, support + 1), image))
    back = {b: a for a, b in fwd.items()}
    return PermutationOracle(lambda n: fwd.get(n, n), lambda n: back.get(n, n),
                             f"finite{tuple(image)}")


def shift_permutation() -> PermutationOracle:
    """``n -> n + 1`` on Z+: injective, with inverse undefined at 1."""
    return PermutationOracle(lambda n: n + 1, lambda n: n - 1 if n > 1 else None, "shift")


def int_of_nat(n: int) -> int:
    """Bijection {0, 1, 2, ...} -> Z: 0 -> 0, odd n -> (n+1)/2, even n -> -n/2."""
    if n < 0:
        raise ValueError("expected a natural")
    return (n + 1) // 2 if n % 2 else -(n // 2)


def nat_of_int(z: int) -> int:
    return 2 * z - 1 if z > 0 else -2 * z


def zigzag_shift_permutation() -> PermutationOracle:
    """Total permutation of Z+ conjugate to ``z -> z + 1`` on the integers.

    ``m`` corresponds to the integer ``int_of_nat(m - 1)``.
    """
    def fwd(m: int) -> int:
        return nat_of_int(int_of_nat(m - 1) + 1) + 1

    def back(m: int) -> int:
        return nat_of_int(int_of_nat(m - 1) - 1) + 1

    return PermutationOracle(fwd, back, "zigzag-shift")


# -- reduction of a function to a permutation ------------------------------------------


@dataclass(frozen=True)
class TauReduction:
    """``(x, y) -> (x + g(y), y)`` on pairs of naturals, where 0 is the zero point.

    Addition happens in the integers through :func:`int_of_nat`; ``g(y)`` is
    ``f(y)`` on the domain and the zero point off it.
    """

    ef: ExtendedFn

    def translation(self, y: int) -> int:
        """The integer added to the first coordinate (raises on uncertified y)."""
        return int_of_nat(self.ef.bar_f(y))

    def apply(self, pair: tuple[int, int]) -> tuple[int, int]:
        x, y = pair
        return nat_of_int(int_of_nat(x) + self.translation(y)), y

    def unapply(self, pair: tuple[int, int]) -> tuple[int, int]:
        x, y = pair
        return nat_of_int(int_of_nat(x) - self.translation(y)), y

    def is_fixed_point(self, pair: tuple[int, int]) -> bool:
        return self.translation(pair[1]) == 0

    @property
    def oracle(self) -> PermutationOracle:
        return PermutationOracle(self.apply, self.unapply, f"tau[{self.ef.program}]")


def tau_build(ef: ExtendedFn) -> TauReduction:
    return TauReduction(ef)


# -- bounded shift --------------------------------------------------------------------


@dataclass(frozen=True)
class ShiftBoundEstimate:
    a: Fraction | None
    b: Fraction | None
    c: Fraction | None
    window: int
    consistent: bool
    witness: int | None = None  # orbit index refuting the closest candidate

    @property
    def verdict(self) -> str:
        return "ConsistentOnWindow" if self.consistent else "Violated"


def _envelope_holds(values: Mapping[int, int], a: Fraction, b: Fraction, c: Fraction) -> bool:
    return all(c * abs(n + a) <= v <= c * abs(n + b) for n, v in values.items())


def _least_scale(values: Mapping[int, int], b: Fraction) -> tuple[Fraction, int] | None:
    """Least c with ``v_n <= c|n+b|`` for all n, and the binding n (None: impossible)."""
    best = None
    for n, v in values.items():
        d = abs(n + b)
        if d == 0:
            return None
        r = Fraction(v) / d
        if best is None or r > best[0]:
            best = (r, n)
    return best


def _greatest_scale(values: Mapping[int, int], a: Fraction) -> tuple[Fraction, int] | None:
    """Greatest c with ``c|n+a| <= v_n`` for all n, and the binding n (None: unbounded)."""
    best = None
    for n, v in values.items():
        d = abs(n + a)
        if d == 0:
            continue
        r = Fraction(v) / d
        if best is None or r < best[0]:
            best = (r, n)
    return best


def bounded_shift_estimate(sigma: PermutationOracle, k: int, N: int) -> ShiftBoundEstimate:
    """Search half-integer shifts ``|a|, |b| <= N/2`` and a scale ``c`` with
    ``c|n+a| <= sigma^n(k) <= c|n+b|`` for every defined ``|n| <= N``.

    For fixed shifts the admissible ``c`` form an interval, so the search is a
    scan over ``(a, b)``. Among feasible pairs the one with smallest
    ``|a| + |b|`` wins (ties: smaller a, then b).
    """
    values = sigma.orbit(k, -N, N)
    grid = [Fraction(h, 2) for h in range(-N, N + 1)]
    lower = {b: _least_scale(values, b) for b in grid}
    upper = {a: _greatest_scale(values, a) for a in grid}
    feasible = []
    closest = None
    for a in grid:
        hi = upper[a]
        for b in grid:
            lo = lower[b]
            if lo is None:
                continue
            c_lo = lo[0]
            c_hi = hi[0] if hi is not None else None
            if c_lo > 0 and (c_hi is None or c_lo <= c_hi):
                feasible.append((abs(a) + abs(b), a, b, c_lo))
            elif c_hi is not None and c_lo > 0:
                gap = c_lo / c_hi if c_hi > 0 else Fraction(10**18)
                if closest is None or gap < closest[0]:
                    closest = (gap, hi[1])
    if feasible:
        _, a, b, c = min(feasible)
        assert _envelope_holds(values, a, b, c)
        return ShiftBoundEstimate(a, b, c, N, True)
    return ShiftBoundEstimate(None, None, None, N, False, closest[1] if closest else None)


@dataclass(frozen=True)
class ShiftTransformCheck:
    m: int
    d: int
    a: Fraction
    b: Fraction
    c: Fraction
    checked: int
    holds: bool


def shift_transform_check(sigma: PermutationOracle, k: int, est: ShiftBoundEstimate,
                          m: int, d: int) -> ShiftTransformCheck:
    """Verify the transformed envelope for ``sigma^m`` at ``l = sigma^d(k)``.

    The constants become ``(c|m|, (d+a)/m, (d+b)/m)``; checked at every ``n``
    with ``|m n + d|`` inside the window of ``est``.
    """
    if not est.consistent:
        raise ValueError("estimate is not consistent on its window")
    if m == 0:
        raise ValueError("m must be nonzero")
    c2 = est.c * abs(m)
    a2 = Fraction(d + est.a, m)
    b2 = Fraction(d + est.b, m)
    l = sigma.power(k, d)
    checked = 0
    holds = True
    W = est.window
    for n in range(-W, W + 1):
        if abs(m * n + d) > W:
            continue
        v = sigma.power(l, m * n) if l is not None else None
        if v is None:
            continue
        checked += 1
        if not c2 * abs(n + a2) <= v <= c2 * abs(n + b2):
            holds = False
    return ShiftTransformCheck(m, d, a2, b2, c2, checked, holds)


# -- permutation series ---------------------------------------------------------------


def psi_perm(sigma: PermutationOracle, k: int, N: int) -> SeriesTruncation:
    """``c_n = 1 / sigma^n(k)**2`` for ``n = 1..N``."""
    coeffs = []
    x = k
    for n in range(1, N + 1):
        x = sigma.apply(x)
        if x is None:
            raise OutsideCertifiedPrefix(f"sigma^{n}({k}) is undefined")
        coeffs.append(Fraction(1, x * x))
    return SeriesTruncation(tuple(coeffs), 1, f"psi-perm[{sigma.description}](k={k})")


@dataclass(frozen=True)
class RationalClosedForm:
    """``sum const * z**a / (1 - z**L)`` over ``terms = ((const, a, L), ...)``."""

    terms: tuple[tuple[Fraction, int, int], ...]

    def coeff(self, n: int) -> Fraction:
        return sum(
            (const for const, a, L in self.terms if n >= a and (n - a) % L == 0), Fraction(0)
        )

    def expand(self, N: int, start: int = 1) -> tuple[Fraction, ...]:
        return tuple(self.coeff(n) for n in range(start, N + 1))

    def evaluate(self, z: Fraction) -> Fraction:
        z = Fraction(z)
        return sum((const * z**a / (1 - z**L) for const, a, L in self.terms), Fraction(0))

    @property
    def pole_orders(self) -> set[int]:
        """Orders of the roots of unity where poles may sit (all poles are simple)."""
        return {L for _, _, L in self.terms}

    def __str__(self) -> str:
        parts = []
        for const, a, L in self.terms:
            parts.append(f"({const})*z^{a}/(1-z^{L})")
        return " + ".join(parts) if parts else "0"


def orbit_period(sigma: PermutationOracle, k: int, max_steps: int = 100_000) -> int | None:
    x = k
    for n in range(1, max_steps + 1):
        x = sigma.apply(x)
        if x is None:
            return None
        if x == k:
            return n
    return None


def finite_orbit_rational(sigma: PermutationOracle, k: int,
                          max_steps: int = 100_000) -> RationalClosedForm:
    """Closed form of the permutation series for a finite orbit of period L:
    ``sum_{a=1..L} z^a / (v_a^2 (1 - z^L))`` with ``v_a = sigma^a(k)``."""
    L = orbit_period(sigma, k, max_steps)
    if L is None:
        raise InfiniteOrbitWithinWindow(f"no return to {k} within {max_steps} steps")
    terms = []
    x = k
    for a in range(1, L + 1):
        x = sigma.apply(x)
        terms.append((Fraction(1, x * x), a, L))
    return RationalClosedForm(tuple(terms))


# -- the Kolmogorov-ordered series -----------------------------------------------------------


def phi_korder(sigma: PermutationOracle, k: int, korder: KOrderTable, N: int) -> SparseSeries:
    """``1/k^2 + sum_{n=1..N} z^{K(n)} / (sigma_K^n(k))^2`` with ``sigma_K = K sigma K^-1``.

    ``k`` is a rank in the table; the orbit is walked on the underlying
    elements and ranked back.
    """
    if not 1 <= k <= len(korder):
        raise OutsideCertifiedPrefix(f"rank {k} is not in the certified table")
    x = korder.inverse(k)
    terms: dict[int, Fraction] = {}
    for n in range(1, N + 1):
        if n not in korder:
            raise OutsideCertifiedPrefix(f"K({n}) is not certified")
        x = sigma.apply(x)
        if x is None or x not in korder:
            raise OutsideCertifiedPrefix(f"sigma^{n} of the start leaves the certified set")
        rank = korder.K(x)
        terms[korder.K(n)] = Fraction(1, rank * rank)
    return SparseSeries(Fraction(1, k * k), terms, f"phi-k[{sigma.description}](k={k})")


@dataclass(frozen=True)
class RankEnvelope:
    c1: Fraction | None
    c2: Fraction | None
    points: int

    @property
    def feasible(self) -> bool:
        return self.points > 0 and self.c1 is not None and self.c1 > 0


def rank_envelope(sigma: PermutationOracle, k: int, korder: KOrderTable, N: int) -> RankEnvelope:
    """Tightest ``c1, c2`` with ``c1 K(n) <= sigma_K^n(k) <= c2 K(n)`` for ``1 <= n <= N``
    inside the certified table (the walk stops where the table ends)."""
    if not 1 <= k <= len(korder):
        raise OutsideCertifiedPrefix(f"rank {k} is not in the certified table")
    x = korder.inverse(k)
    ratios = []
    for n in range(1, N + 1):
        x = sigma.apply(x)
        if x is None or x not in korder or n not in korder:
            break
        ratios.append(Fraction(korder.K(x), korder.K(n)))
    if not ratios:
        return RankEnvelope(None, None, 0)
    return RankEnvelope(min(ratios), max(ratios), len(ratios))


# -- classification ----------------------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    kind: str  # "PolarAtOne" | "RootOfUnityRational" | "RegularOnDisk"
    period: int | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "period": self.period, "diagnostics": self.diagnostics}


MIN_HORIZON = 32


def _dense(s) -> list[Fraction]:
    m = s.as_map()
    top = max(m, default=0)
    return [m.get(n, Fraction(0)) for n in range(top + 1)]


def classify_series(s: SeriesTruncation | SparseSeries, tol: float = 1e-6) -> Classification:
    """Sort a truncation into polar at 1, rational with root-of-unity poles, or
    regular on the closed disk.

    Polar and periodic patterns are read exactly off the second half of the
    coefficients. Regularity needs a small tail: a power law ``A n^-p`` is
    fitted to the suffix-maximum envelope at ``N/2`` and ``N`` and, when
    ``p > 1``, the integral bound ``A N^(1-p) / (p-1)`` must fall below ``tol``.
    """
    coeffs = _dense(s)
    N = len(coeffs) - 1
    abel = math.fsum(float(c) for c in coeffs)
    diag: dict = {"horizon": N, "abel_partial_sum": abel}
    if N < MIN_HORIZON:
        raise InconclusiveSeries(f"horizon {N} is below {MIN_HORIZON}", diag)
    tail = coeffs[N // 2:]
    if all(c == tail[0] for c in tail):
        if tail[0] != 0:
            diag["tail_value"] = float(tail[0])
            return Classification("PolarAtOne", 1, diag)
    else:
        for L in range(2, len(tail) // 4 + 1):
            if all(tail[i] == tail[i + L] for i in range(len(tail) - L)):
                return Classification("RootOfUnityRational", L, diag)
    env = [0.0] * (N + 1)
    run_max = 0.0
    for n in range(N, -1, -1):
        run_max = max(run_max, abs(float(coeffs[n])))
        env[n] = run_max
    e_half, e_end = env[N // 2], env[N]
    if e_end == 0.0:
        diag["tail_estimate"] = 0.0
        return Classification("RegularOnDisk", None, diag)
    if e_half <= e_end:
        raise InconclusiveSeries("coefficients do not decay at the horizon", diag)
    p = math.log(e_half / e_end) / math.log(N / (N // 2))
    diag["decay_exponent"] = p
    if p <= 1:
        raise InconclusiveSeries(f"fitted decay exponent {p:.3f} <= 1", diag)
    tail_estimate = e_end * N / (p - 1)
    diag["tail_estimate"] = tail_estimate
    if tail_estimate >= tol:
        raise InconclusiveSeries(f"tail estimate {tail_estimate:.3g} >= tolerance {tol:g}", diag)
    return Classification("RegularOnDisk", None, diag)


def series_report(s: SeriesTruncation | SparseSeries, classification: Classification | None = None,
                  error: str | None = None) -> dict:
    out = {"series": s.to_dict()}
    if classification is not None:
        out["classification"] = classification.to_dict()
    if error is not None:
        out["classification"] = {"kind": "Inconclusive", "reason": error}
    return out
