"""Explicit bijections between positive naturals and structured sets.

Coproduct and binary-word numberings, the Cantor pairing, and the rank
numbering ``N_R`` of pairs ordered by the products ``k * R_l``.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Callable, Generic, TypeVar

from .errors import CertificateViolation, OutOfRange

T = TypeVar("T")


@dataclass(frozen=True)
class Numbering(Generic[T]):
    """A bijection Z+ -> elements, with its inverse and a world label."""

    forward: Callable[[int], T]
    backward: Callable[[T], int]
    domain_tag: str


# -- coproduct ---------------------------------------------------------------------


def coprod_number(m: int, n: int) -> tuple[int, int]:
    """Map ``n`` to ``(summand i, element k)`` of an m-fold coproduct."""
    if m < 1 or n < 1:
        raise OutOfRange(f"need m >= 1 and n >= 1, got m={m}, n={n}")
    return (n - 1) % m + 1, (n + m - 1) // m


def coprod_unnumber(m: int, i: int, k: int) -> int:
    if not 1 <= i <= m:
        raise OutOfRange(f"summand {i} outside 1..{m}")
    if k < 1:
        raise OutOfRange(f"element index must be >= 1, got {k}")
    return m * (k - 1) + i


# -- binary words --------------------------------------------------------------------


def bin_number(n: int) -> str:
    """Binary expansion of ``n`` with its leading 1 removed."""
    if n < 1:
        raise OutOfRange("bin numbering starts at 1")
    return bin(n)[3:]


def bin_unnumber(word: str) -> int:
    if word.strip("01"):
        raise ValueError(f"not a binary word: {word!r}")
    return int("1" + word, 2)


# -- Cantor pairing ------------------------------------------------------------------


def cantor_pair(k: int, l: int) -> int:
    if k < 1 or l < 1:
        raise OutOfRange("Cantor pairing is defined on positive naturals")
    s = k + l
    return (s - 2) * (s - 1) // 2 + k


def cantor_unpair(n: int) -> tuple[int, int]:
    if n < 1:
        raise OutOfRange("Cantor pairing is defined on positive naturals")
    w = (isqrt(8 * (n - 1) + 1) - 1) // 2
    k = n - w * (w + 1) // 2
    return k, w + 2 - k


# -- R-sequences ---------------------------------------------------------------------


@dataclass(frozen=True)
class Convergent:
    bound: Fraction  # c >= sum of 1/R_l


@dataclass(frozen=True)
class Divergent:
    F: Callable[[int], float]  # sum_{l <= M} 1/R_l <= F(M)
    label: str = ""


@dataclass(frozen=True)
class RSequence:
    """A nondecreasing positive sequence tending to infinity, with a growth certificate."""

    name: str
    value_at: Callable[[int], Fraction | int]
    convergence: Convergent | Divergent

    def __call__(self, l: int) -> Fraction | int:
        return self.value_at(l)

    def verify_certificate(self, prefix: int = 10_000) -> None:
        """Check the certificate against exact partial sums on ``l <= prefix``."""
        total = Fraction(0)
        prev = None
        for l in range(1, prefix + 1):
            r = Fraction(self.value_at(l))
            if r <= 0:
                raise CertificateViolation(f"R_{l} = {r} is not positive")
            if prev is not None and r < prev:
                raise CertificateViolation(f"R is not nondecreasing at l={l}")
            prev = r
            total += 1 / r
            if isinstance(self.convergence, Convergent):
                if total > self.convergence.bound:
                    raise CertificateViolation(f"partial sum {float(total)} exceeds c at l={l}")
            elif float(total) > self.convergence.F(l) * (1 + 1e-12):
                raise CertificateViolation(f"partial sum exceeds F({l})")

    def rank_bound(self, k: int, l: int) -> float | Fraction:
        """Upper bound on ``N_R(k, l)`` implied by the certificate."""
        v = k * Fraction(self.value_at(l))
        if isinstance(self.convergence, Convergent):
            return self.convergence.bound * (v + 1)
        return float(v + 1) * self.convergence.F(math.ceil(v + 1))


def _pow2(l: int) -> int:
    return 1 << l


def _linear(l: int) -> int:
    return l


def _harmonic_bound(M: int) -> float:
    return 1.0 + math.log(M)


R_POW2 = RSequence("pow2", _pow2, Convergent(Fraction(1)))
R_LINEAR = RSequence("linear", _linear, Divergent(_harmonic_bound, "1+ln M"))


def nr_key(k: int, l: int, R: RSequence) -> tuple[Fraction | int, int]:
    return k * R(l), l


def nr_compare(a: tuple[int, int], b: tuple[int, int], R: RSequence) -> int:
    """Three-way comparison in the order ``<_R``: by product, ties by second index."""
    ka, kb = nr_key(*a, R), nr_key(*b, R)
    if ka == kb:
        # equal products and equal second index force equal first index
        return 0
    return -1 if ka < kb else 1


# -- the N_R numbering ------------------------------------------------------------------


def _count_terms(R: RSequence, M) -> int:
    j = 1
    while R(j) < M:
        j += 1
    return j - 1


def nr_rank_by_counting(k: int, l: int, R: RSequence) -> int:
    """Rank of (k, l) from the closed counting formula (no enumeration)."""
    v = k * Fraction(R(l))
    below = 0
    ties = 0
    j = 1
    while True:
        rj = Fraction(R(j))
        if rj >= v and j >= l:
            break
        if rj < v:
            q = v / rj
            below += math.ceil(q) - 1
        if j < l and (v / rj).denominator == 1:
            ties += 1
        j += 1
    return below + ties + 1


@dataclass
class NRNumbering:
    """Rank bijection ``N_R`` backed by a cached, sorted enumeration of ``V_R(M)``.

    ``V_R(M)`` is the set of pairs with ``k * R_l <= M``; sorted by the order
    ``<_R`` it lists ranks ``1 .. card V_R(M)`` in sequence. The cache grows by
    doubling ``M``. Ranks of pairs far beyond the cache fall back to the
    counting formula when that needs few terms.
    """

    R: RSequence
    enumeration_limit: int = 4_000_000
    counting_terms: int = 256
    _M: int = 0
    _pairs: list[tuple[int, int]] = field(default_factory=list)
    _keys: list[tuple] = field(default_factory=list)
    _rank: dict[tuple[int, int], int] = field(default_factory=dict)

    def _enumerate(self, M: int) -> None:
        entries = []
        j = 1
        while self.R(j) <= M:
            rj = self.R(j)
            top = M // rj if isinstance(rj, int) else int(Fraction(M) / rj)
            entries.extend((k * rj, j, k) for k in range(1, top + 1))
            j += 1
            if len(entries) > self.enumeration_limit:
                raise MemoryError(f"V_R({M}) exceeds the enumeration limit")
        entries.sort()
        self._M = M
        self._keys = [(v, j) for v, j, _ in entries]
        self._pairs = [(k, j) for _, j, k in entries]
        self._rank = {pair: i + 1 for i, pair in enumerate(self._pairs)}

    def ensure(self, M: int) -> None:
        """Make the cache cover ``V_R(M)``."""
        if M <= self._M:
            return
        new = max(M, 2 * self._M, 64)
        self._enumerate(new)

    def shell(self, M: int) -> list[tuple[int, int]]:
        """Pairs of ``V_R(M)`` in rank order."""
        self.ensure(M)
        stop = bisect_left(self._keys, (Fraction(M), float("inf")))
        # keys are (value, l); everything with value <= M precedes (M, inf)
        return self._pairs[:stop]

    def card(self, M: int) -> int:
        return len(self.shell(M))

    def number(self, k: int, l: int) -> int:
        if k < 1 or l < 1:
            raise OutOfRange("N_R is defined on positive pairs")
        v = k * self.R(l)
        if v <= self._M:
            rank = self._rank[(k, l)]
        elif _count_terms(self.R, v) <= self.counting_terms:
            rank = nr_rank_by_counting(k, l, self.R)
        else:
            self.ensure(math.ceil(v))
            rank = self._rank[(k, l)]
        bound = self.R.rank_bound(k, l)
        if rank > bound:
            raise CertificateViolation(f"N_R({k},{l}) = {rank} exceeds certificate bound {bound}")
        return rank

    def unnumber(self, n: int) -> tuple[int, int]:
        if n < 1:
            raise OutOfRange("ranks start at 1")
        while len(self._pairs) < n:
            self._enumerate(max(2 * self._M, 64))
        return self._pairs[n - 1]

    def as_numbering(self) -> Numbering[tuple[int, int]]:
        return Numbering(self.unnumber, lambda kl: self.number(*kl), f"pairs/N_R[{self.R.name}]")


_NR_CACHE: dict[str, NRNumbering] = {}


def nr_numbering(R: RSequence) -> NRNumbering:
    """Shared cached numbering per R-sequence name."""
    if R.name not in _NR_CACHE:
        _NR_CACHE[R.name] = NRNumbering(R)
    return _NR_CACHE[R.name]


def nr_number(k: int, l: int, R: RSequence = R_POW2) -> int:
    return nr_numbering(R).number(k, l)


def nr_unnumber(n: int, R: RSequence = R_POW2) -> tuple[int, int]:
    return nr_numbering(R).unnumber(n)


COPROD = {m: Numbering(lambda n, m=m: coprod_number(m, n), lambda ik, m=m: coprod_unnumber(m, *ik),
                       f"coproduct[{m}]") for m in range(1, 6)}
BIN = Numbering(bin_number, bin_unnumber, "binary words")
CANTOR = Numbering(cantor_unpair, lambda kl: cantor_pair(*kl), "pairs/Cantor")
