"""Hopf algebra of programs under deconcatenation over valid cuts, characters
into Laurent polynomials in ``u = 1 - z``, and Birkhoff decomposition.

Monomials are sorted tuples of nonempty programs (the algebra is commutative);
the empty tuple is the unit. Elements and tensors are dicts from monomials
(or tuples of monomials) to :class:`~fractions.Fraction` coefficients.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, gcd
from typing import Callable, Iterable, Mapping

from . import _backend
from .errors import UncertifiedGenerator
from .machine import (
    DEFAULT_POLICY,
    JZ,
    INC,
    BudgetPolicy,
    Program,
    Unknown,
    enumerate_programs,
    eval_fn,
    in_domain,
)

Monomial = tuple[Program, ...]
UNIT: Monomial = ()


# -- valid cuts ----------------------------------------------------------------------


@lru_cache(maxsize=None)
def valid_cuts(p: Program) -> tuple[int, ...]:
    """Positions no jump crosses; 0 and ``len(p)`` are always included."""
    n = len(p)
    spans = [(i, i + ins.offset) for i, ins in enumerate(p) if ins.is_jump]
    out = []
    for c in range(n + 1):
        if all(not (j < c < t or t < c <= j) for j, t in spans):
            out.append(c)
    return tuple(out)


def _mono(*programs: Program) -> Monomial:
    return tuple(sorted(p for p in programs if len(p)))


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    return tuple(sorted(a + b))


def degree(m: Monomial) -> int:
    return sum(len(p) for p in m)


# -- elements --------------------------------------------------------------------------


@dataclass(frozen=True)
class HopfElement:
    terms: Mapping[Monomial, Fraction] = field(default_factory=dict)

    @classmethod
    def of(cls, terms: Mapping[Monomial, Fraction | int]) -> HopfElement:
        return cls({m: Fraction(c) for m, c in terms.items() if c})

    @classmethod
    def unit(cls) -> HopfElement:
        return cls({UNIT: Fraction(1)})

    @classmethod
    def gen(cls, p: Program) -> HopfElement:
        p.validate()
        return cls({_mono(p): Fraction(1)})

    @classmethod
    def monomial(cls, m: Monomial, coeff: Fraction | int = 1) -> HopfElement:
        return cls.of({m: coeff})

    def __add__(self, other: HopfElement) -> HopfElement:
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return HopfElement.of(out)

    def __neg__(self) -> HopfElement:
        return HopfElement({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: HopfElement) -> HopfElement:
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return HopfElement.of({m: c * other for m, c in self.terms.items()})
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return HopfElement.of(out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, HopfElement) and dict(self.terms) == dict(other.terms)

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> set[int]:
        return {degree(m) for m in self.terms}

    def __str__(self) -> str:
        return format_element(self)


Tensor = dict  # tuple[Monomial, ...] -> Fraction


def _tensor_add(out: dict, key, c) -> None:
    v = out.get(key, 0) + c
    if v:
        out[key] = v
    else:
        out.pop(key, None)


@lru_cache(maxsize=None)
def _gen_coproduct(p: Program) -> tuple[tuple[Monomial, Monomial], ...]:
    """Terms of the coproduct of one generator: prefix (runs first) on the left."""
    return tuple((_mono(p[:i]), _mono(p[i:])) for i in valid_cuts(p))


def _mono_coproduct(m: Monomial) -> dict[tuple[Monomial, Monomial], Fraction]:
    out: dict = {(UNIT, UNIT): Fraction(1)}
    for p in m:
        nxt: dict = {}
        for (l1, r1), c in out.items():
            for l2, r2 in _gen_coproduct(p):
                _tensor_add(nxt, (_mono_mul(l1, l2), _mono_mul(r1, r2)), c)
        out = nxt
    return out


def coproduct(x: HopfElement) -> Tensor:
    """Sum over valid cuts of ``[prefix] ⊗ [suffix]``, extended multiplicatively."""
    out: dict = {}
    for m, c in x.terms.items():
        for key, c2 in _mono_coproduct(m).items():
            _tensor_add(out, key, c * c2)
    return out


def counit(x: HopfElement) -> Fraction:
    return Fraction(x.terms.get(UNIT, 0))


def tensor_left_delta(t: Tensor) -> Tensor:
    """``(Δ ⊗ id)`` on a two-fold tensor."""
    out: dict = {}
    for (a, b), c in t.items():
        for (a1, a2), c2 in _mono_coproduct(a).items():
            _tensor_add(out, (a1, a2, b), c * c2)
    return out


def tensor_right_delta(t: Tensor) -> Tensor:
    """``(id ⊗ Δ)`` on a two-fold tensor."""
    out: dict = {}
    for (a, b), c in t.items():
        for (b1, b2), c2 in _mono_coproduct(b).items():
            _tensor_add(out, (a, b1, b2), c * c2)
    return out


# -- antipode ------------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _gen_antipode(p: Program) -> HopfElement:
    # S([p]) = -[p] - sum over proper cuts S([prefix]) [suffix]
    out = -HopfElement.gen(p)
    for i in valid_cuts(p)[1:-1]:
        out = out - _gen_antipode(p[:i]) * HopfElement.gen(p[i:])
    return out


def antipode(x: HopfElement) -> HopfElement:
    out = HopfElement()
    for m, c in x.terms.items():
        term = HopfElement.unit()
        for p in m:
            term = term * _gen_antipode(p)
        out = out + term * c
    return out


# -- the subtraction algebra ------------------------------------------------------------------


class AValue:
    """Laurent polynomial in ``u = 1 - z`` with rational coefficients.

    Stored as integer numerators over one common denominator, starting at
    exponent ``lo``. Instances are immutable and hashable.
    """

    __slots__ = ("lo", "nums", "den", "_hash")

    def __init__(self, lo: int, nums: Iterable[int], den: int = 1) -> None:
        nums = list(nums)
        while nums and nums[-1] == 0:
            nums.pop()
        start = 0
        while start < len(nums) and nums[start] == 0:
            start += 1
        nums = nums[start:]
        if not nums:
            lo, den = 0, 1
        else:
            lo += start
            if den < 0:
                nums, den = [-v for v in nums], -den
            g = den
            for v in nums:
                g = gcd(g, v)
                if g == 1:
                    break
            if g > 1:
                nums = [v // g for v in nums]
                den //= g
        self.lo = lo
        self.nums = tuple(nums)
        self.den = den
        self._hash = None

    @classmethod
    def from_terms(cls, terms: Mapping[int, Fraction | int]) -> AValue:
        terms = {j: Fraction(c) for j, c in terms.items() if c}
        if not terms:
            return ZERO
        lo, hi = min(terms), max(terms)
        den = 1
        for c in terms.values():
            den = den * c.denominator // gcd(den, c.denominator)
        nums = [0] * (hi - lo + 1)
        for j, c in terms.items():
            nums[j - lo] = c.numerator * (den // c.denominator)
        return cls(lo, nums, den)

    @classmethod
    def const(cls, c: Fraction | int) -> AValue:
        c = Fraction(c)
        return cls(0, [c.numerator], c.denominator)

    @classmethod
    def from_z_poly(cls, coeffs: Iterable[Fraction]) -> AValue:
        """Rebase ``sum c_n z^n`` to powers of ``u`` using ``z = 1 - u``."""
        coeffs = [Fraction(c) for c in coeffs]
        terms: dict[int, Fraction] = {}
        for n, c in enumerate(coeffs):
            if not c:
                continue
            for j in range(n + 1):
                terms[j] = terms.get(j, 0) + c * comb(n, j) * (-1) ** j
        return cls.from_terms(terms)

    def terms(self) -> dict[int, Fraction]:
        return {self.lo + i: Fraction(v, self.den) for i, v in enumerate(self.nums) if v}

    def coeff(self, j: int) -> Fraction:
        i = j - self.lo
        if 0 <= i < len(self.nums):
            return Fraction(self.nums[i], self.den)
        return Fraction(0)

    @property
    def hi(self) -> int:
        return self.lo + len(self.nums) - 1

    def is_zero(self) -> bool:
        return not self.nums

    def _coerce(self, other) -> AValue:
        if isinstance(other, AValue):
            return other
        if isinstance(other, (int, Fraction)):
            return AValue.const(other)
        return NotImplemented

    def __add__(self, other) -> AValue:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.nums:
            return self
        if not self.nums:
            return other
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        g = gcd(self.den, other.den)
        fa, fb = other.den // g, self.den // g
        out = [0] * (hi - lo + 1)
        for i, v in enumerate(self.nums):
            out[self.lo - lo + i] += v * fa
        for i, v in enumerate(other.nums):
            out[other.lo - lo + i] += v * fb
        return AValue(lo, out, self.den * fa)

    __radd__ = __add__

    def __neg__(self) -> AValue:
        return AValue(self.lo, [-v for v in self.nums], self.den)

    def __sub__(self, other) -> AValue:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> AValue:
        return (-self) + other

    def __mul__(self, other) -> AValue:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self.nums or not other.nums:
            return ZERO
        out = [0] * (len(self.nums) + len(other.nums) - 1)
        for i, a in enumerate(self.nums):
            if a:
                for j, b in enumerate(other.nums):
                    out[i + j] += a * b
        return AValue(self.lo + other.lo, out, self.den * other.den)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.lo == other.lo and self.nums == other.nums and self.den == other.den

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.lo, self.nums, self.den))
        return self._hash

    def pi_minus(self) -> AValue:
        """Polar part: the negative powers of ``u``."""
        if self.lo >= 0:
            return ZERO
        return AValue(self.lo, self.nums[: -self.lo], self.den)

    polar = pi_minus

    def regular(self) -> AValue:
        if self.lo >= 0:
            return self
        return AValue(0, self.nums[-self.lo:], self.den)

    def is_polar_free(self) -> bool:
        return not self.nums or self.lo >= 0

    def is_polar_plus_constant(self) -> bool:
        return not self.nums or self.hi <= 0

    def evaluate(self, u: Fraction) -> Fraction:
        u = Fraction(u)
        return sum((c * u**j for j, c in self.terms().items()), Fraction(0))

    def __repr__(self) -> str:
        return f"AValue({format_avalue(self)})"

    def __str__(self) -> str:
        return format_avalue(self)


ZERO = AValue(0, [])
ONE = AValue(0, [1])
U_INV = AValue(-1, [1])


def pi_minus(v: AValue) -> AValue:
    return v.pi_minus()


# -- characters ----------------------------------------------------------------------------------


class Character:
    """Multiplicative unital map into :class:`AValue`, given on generators."""

    def __init__(self, on_generator: Callable[[Program], AValue], name: str = "") -> None:
        self._f = on_generator
        self._cache: dict[Program, AValue] = {}
        self.name = name

    @classmethod
    def from_values(cls, values: Mapping[Program, AValue], name: str = "") -> Character:
        def lookup(p: Program) -> AValue:
            try:
                return values[p]
            except KeyError:
                raise KeyError(f"character {name!r} has no value on [{p}]") from None

        return cls(lookup, name)

    def on_generator(self, p: Program) -> AValue:
        v = self._cache.get(p)
        if v is None:
            v = self._f(p)
            self._cache[p] = v
        return v

    def on_monomial(self, m: Monomial) -> AValue:
        out = ONE
        for p in m:
            out = out * self.on_generator(p)
        return out

    def __call__(self, x: HopfElement | Program) -> AValue:
        if isinstance(x, Program):
            return self.on_generator(x) if len(x) else ONE
        out = ZERO
        for m, c in x.terms.items():
            out = out + self.on_monomial(m) * c
        return out


def _psi_z_coeffs(value: int, N: int) -> list[Fraction]:
    return [Fraction(1, (1 + n * value) ** 2) for n in range(N + 1)]


@lru_cache(maxsize=4096)
def halting_value(value: int | None, N: int) -> AValue:
    """Character value for output ``value`` (``None``: outside the domain)."""
    if value is None:
        return U_INV
    return AValue.from_z_poly(_psi_z_coeffs(value, N))


def char_from_halting(k: int, N: int, policy: BudgetPolicy = DEFAULT_POLICY) -> Character:
    """Character sending ``[p]`` to ``u^-1`` off the domain at ``k`` and to the
    degree-``N`` truncation of the halting series rebased to ``u`` on it."""

    def value(p: Program) -> AValue:
        out = eval_fn(p, k, policy)
        if isinstance(out, Unknown):
            raise UncertifiedGenerator(p, k)
        return halting_value(out.value if in_domain(out) else None, N)

    return Character(value, f"halting[k={k},N={N}]")


def convolve(f: Callable[[HopfElement], object], g: Callable[[HopfElement], object],
             x: HopfElement):
    """``(f * g)(x) = sum f(x') g(x'')`` over the coproduct of ``x``.

    ``f`` and ``g`` may take values in any ring whose elements support
    ``+``, ``*`` and scalar multiplication by Fractions.
    """
    total = None
    for (a, b), c in coproduct(x).items():
        term = f(HopfElement.monomial(a)) * g(HopfElement.monomial(b)) * c
        total = term if total is None else total + term
    return total if total is not None else f(HopfElement()) * 0


def counit_value(x: HopfElement) -> AValue:
    """The counit viewed as an AValue-valued map (the convolution unit)."""
    return AValue.const(counit(x))


def _identity(x: HopfElement) -> HopfElement:
    return x


# -- Birkhoff decomposition --------------------------------------------------------------------------


@dataclass
class BirkhoffPair:
    phi_minus: dict[Program, AValue]
    phi_plus: dict[Program, AValue]
    phi_bar: dict[Program, AValue]
    identity_holds: dict[Program, bool]
    excluded: list[Program] = field(default_factory=list)  # not certified (skip mode only)

    @property
    def minus(self) -> Character:
        return Character.from_values(self.phi_minus, "phi-")

    @property
    def plus(self) -> Character:
        return Character.from_values(self.phi_plus, "phi+")

    def all_identities_hold(self) -> bool:
        return all(self.identity_holds.values())


def birkhoff_decompose(phi: Character, grade_max: int, generators: Iterable[Program] | None = None,
                       *, skip_uncertified: bool = False, registers: int = 2,
                       max_offset: int = 2) -> BirkhoffPair:
    """Bogoliubov recursion in increasing degree.

    ``phi_bar(p) = phi(p) + sum over proper cuts phi_-(prefix) phi(suffix)``,
    ``phi_-(p) = -pi(phi_bar(p))``, ``phi_+(p) = phi_bar(p) - pi(phi_bar(p))``.

    ``generators`` defaults to every valid program of size 1..``grade_max``
    over the small alphabet. With ``skip_uncertified`` a generator is dropped
    (and listed in ``excluded``) when it, or any piece of its coproduct, has
    no certified character value; otherwise the error propagates. The
    identity ``phi_- * phi = phi_+`` is re-derived for every generator via
    :func:`convolve` over the coproduct.
    """
    if generators is None:
        generators = (p for p in enumerate_programs(grade_max, registers, max_offset) if len(p))
    gens = sorted({p for p in generators if 1 <= len(p) <= grade_max}, key=lambda p: (len(p), p))
    minus: dict[Program, AValue] = {}
    plus: dict[Program, AValue] = {}
    bar: dict[Program, AValue] = {}
    excluded: list[Program] = []
    bad: set[Program] = set()

    def value(p: Program) -> AValue | None:
        try:
            return phi.on_generator(p)
        except UncertifiedGenerator:
            if not skip_uncertified:
                raise
            return None

    for p in gens:
        cuts = valid_cuts(p)
        pieces = [p[:i] for i in cuts[1:-1]] + [p[i:] for i in cuts[1:-1]]
        own = value(p)
        if own is None or any(q in bad or value(q) is None for q in pieces):
            bad.add(p)
            excluded.append(p)
            continue
        total = own
        for i in cuts[1:-1]:
            pre = p[:i]
            if pre not in minus:
                # prefixes outside the supplied set are decomposed on demand
                _extend(pre, phi, minus, plus, bar)
            total = total + minus[pre] * phi.on_generator(p[i:])
        polar = total.pi_minus()
        bar[p] = total
        minus[p] = -polar
        plus[p] = total - polar

    minus_char = Character(lambda q: minus[q] if q in minus else _extend(q, phi, minus, plus, bar))
    checks = {}
    for p in gens:
        if p in bad:
            continue
        conv = convolve(minus_char, phi, HopfElement.gen(p))
        checks[p] = conv == plus[p] and plus[p].is_polar_free() and minus[p].is_polar_plus_constant()
    return BirkhoffPair(minus, plus, bar, checks, excluded)


def _extend(p: Program, phi: Character, minus, plus, bar) -> AValue:
    """Decompose a single generator (and, recursively, its prefixes)."""
    total = phi.on_generator(p)
    for i in valid_cuts(p)[1:-1]:
        pre = p[:i]
        if pre not in minus:
            _extend(pre, phi, minus, plus, bar)
        total = total + minus[pre] * phi.on_generator(p[i:])
    polar = total.pi_minus()
    bar[p] = total
    minus[p] = -polar
    plus[p] = total - polar
    return minus[p]


# -- law checks --------------------------------------------------------------------------------------


@dataclass(frozen=True)
class LawCheck:
    coassociative: bool
    counit: bool
    antipode: bool
    graded: bool

    def __bool__(self) -> bool:
        return self.coassociative and self.counit and self.antipode and self.graded


def check_laws(p: Program) -> LawCheck:
    """Coassociativity, both counit laws, both antipode laws and grading on ``[p]``."""
    x = HopfElement.gen(p)
    d = coproduct(x)
    coassoc = tensor_left_delta(d) == tensor_right_delta(d)
    left = HopfElement.of(_collapse(((b, c * counit(HopfElement.monomial(a))) for (a, b), c in d.items())))
    right = HopfElement.of(_collapse(((a, c * counit(HopfElement.monomial(b))) for (a, b), c in d.items())))
    counit_ok = left == x and right == x
    eps = HopfElement.unit() * counit(x)
    s_id = convolve(antipode, _identity, x)
    id_s = convolve(_identity, antipode, x)
    antipode_ok = s_id == eps and id_s == eps
    graded = all(degree(a) + degree(b) == len(p) for a, b in d)
    return LawCheck(coassoc, counit_ok, antipode_ok, graded)


def _collapse(pairs) -> dict:
    out: dict = {}
    for m, c in pairs:
        out[m] = out.get(m, 0) + c
    return out


def skeleton_representative(n: int, code: int, max_offset: int) -> Program:
    """A program of size ``n`` with the given jump skeleton and pairwise distinct
    instructions (the register index is the position)."""
    base = 2 * max_offset + 2
    digits = []
    for _ in range(n):
        code, digit = divmod(code, base)
        digits.append(digit)
    digits.reverse()
    out = []
    for pos, digit in enumerate(digits):
        if digit == 0:
            out.append(INC(pos + 1))
        else:
            out.append(JZ(pos + 1, digit - 1 - max_offset))
    return Program(tuple(out)).validate()


@dataclass
class ExhaustiveLawReport:
    max_size: int
    literal_programs: int
    coherence_violations: int
    classes: int
    class_failures: list[tuple[int, int]]
    literal_checked: int = 0
    literal_failures: list[Program] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not (self.coherence_violations or self.class_failures or self.literal_failures)


def expected_program_count(max_size: int, registers: int, max_offset: int) -> int:
    """Closed-form count of valid programs of size <= max_size over the alphabet."""
    total = 0
    for n in range(max_size + 1):
        count = 1
        for pos in range(n):
            offsets = sum(1 for d in range(-max_offset, max_offset + 1) if 0 <= pos + d <= n)
            count *= 2 * registers + offsets * (registers + 1)
        total += count
    return total


def check_laws_exhaustive(max_size: int = 6, registers: int = 2, max_offset: int = 2,
                          literal_size: int = 0) -> ExhaustiveLawReport:
    """Hopf laws for every valid program up to ``max_size``.

    Whether a cut is valid depends only on where the jumps are and where they
    land, so the laws for ``[p]`` are the image of the laws for any program
    with the same jump skeleton under the algebra map renaming its
    subprograms. The compiled scan visits every literal program, checks
    nested-cut coherence and groups programs by skeleton; the symbolic checks
    then run once per skeleton on a representative with distinct letters.
    ``literal_size`` additionally runs the symbolic checks on every literal
    program up to that size.
    """
    total, violations, counts = _backend.scan_skeletons(max_size, registers, max_offset)
    failures = []
    for n, code in sorted(counts):
        if n == 0:
            continue
        if not check_laws(skeleton_representative(n, code, max_offset)):
            failures.append((n, code))
    report = ExhaustiveLawReport(max_size, total, violations, len(counts), failures)
    if literal_size:
        for p in enumerate_programs(literal_size, registers, max_offset):
            if not len(p):
                continue
            report.literal_checked += 1
            if not check_laws(p):
                report.literal_failures.append(p)
    return report


def nested_cut_coherent(p: Program) -> bool:
    """A cut valid in ``p`` stays valid in both halves of every other valid cut."""
    cuts = set(valid_cuts(p))
    for i in cuts:
        left = {c for c in cuts if c <= i}
        right = {c - i for c in cuts if c >= i}
        if set(valid_cuts(p[:i])) != left or set(valid_cuts(p[i:])) != right:
            return False
    return True


# -- text and JSON output ---------------------------------------------------------------------------


def format_program_inline(p: Program) -> str:
    return "; ".join(str(i) for i in p)


def format_monomial(m: Monomial) -> str:
    if not m:
        return "1"
    counts = Counter(m)
    parts = []
    for p in sorted(counts):
        base = f"[{format_program_inline(p)}]"
        parts.append(base if counts[p] == 1 else f"{base}^{counts[p]}")
    return "*".join(parts)


def _format_coeff(c: Fraction, body: str, first: bool) -> str:
    sign = "-" if c < 0 else "+"
    mag = abs(c)
    if body == "1":
        text = str(mag)
    elif mag == 1:
        text = body
    else:
        text = f"{mag}*{body}"
    if first:
        return text if sign == "+" else f"-{text}"
    return f" {sign} {text}"


def _term_order(m: Monomial):
    return (degree(m), len(m), m)


def format_element(x: HopfElement) -> str:
    if not x.terms:
        return "0"
    out = []
    for i, m in enumerate(sorted(x.terms, key=_term_order)):
        out.append(_format_coeff(x.terms[m], format_monomial(m), i == 0))
    return "".join(out)


def format_tensor(t: Tensor) -> str:
    if not t:
        return "0"
    keys = sorted(t, key=lambda k: tuple(_term_order(m) for m in k))
    out = []
    for i, key in enumerate(keys):
        body = "⊗".join(format_monomial(m) for m in key)
        out.append(_format_coeff(t[key], body, i == 0))
    return "".join(out)


def format_avalue(v: AValue) -> str:
    if v.is_zero():
        return "0"
    out = []
    for i, (j, c) in enumerate(sorted(v.terms().items())):
        body = "1" if j == 0 else ("u" if j == 1 else f"u^{j}")
        out.append(_format_coeff(c, body, i == 0))
    return "".join(out)


def element_json(x: HopfElement) -> list[dict]:
    return [
        {"coeff": f"{c.numerator}/{c.denominator}", "monomial": [format_program_inline(p) for p in m]}
        for m, c in sorted(x.terms.items(), key=lambda kv: _term_order(kv[0]))
    ]


def tensor_json(t: Tensor) -> list[dict]:
    keys = sorted(t, key=lambda k: tuple(_term_order(m) for m in k))
    return [
        {
            "coeff": f"{t[k].numerator}/{t[k].denominator}",
            "factors": [[format_program_inline(p) for p in m] for m in k],
        }
        for k in keys
    ]


def avalue_json(v: AValue) -> dict:
    return {str(j): f"{c.numerator}/{c.denominator}" for j, c in sorted(v.terms().items())}


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
