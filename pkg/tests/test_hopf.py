import random
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, strategies as st

from haltren.errors import UncertifiedGenerator
from haltren.hopf import (
    ONE, U_INV, ZERO, AValue, Character, HopfElement, antipode, avalue_json, birkhoff_decompose,
    char_from_halting, check_laws, check_laws_exhaustive, convolve, coproduct, counit,
    counit_value, expected_program_count, format_avalue, format_element, format_tensor,
    halting_value, nested_cut_coherent, pi_minus, valid_cuts,
)
from haltren.machine import (
    DEC, EMPTY, INC, JMP, JZ, BudgetPolicy, Program, Unknown, enumerate_programs, parse_program,
    random_program, run,
)

from .conftest import COUNTER

A, B = Program.of(INC(1)), Program.of(DEC(2))
AB = Program.of(INC(1), DEC(2))
SMALL = [p for p in enumerate_programs(4, 2, 2) if len(p)]


def certified_at(k, programs, budget=2000):
    return [p for p in programs if not isinstance(run(p, k, budget, 4096), Unknown)]


def gen(p):
    return HopfElement.gen(p)


def mono(*ps):
    return tuple(sorted(p for p in ps if len(p)))


# -- oracles ---------------------------------------------------------------------------


def oracle_cuts(p):
    return tuple(i for i in range(len(p) + 1) if p[:i].is_valid and p[i:].is_valid)


def oracle_antipode(p):
    """Sum over chains of valid cuts 0 < c1 < ... < n of (-1)^pieces * product of pieces."""
    cuts = oracle_cuts(p)
    n = len(p)
    out = {}

    def walk(start, pieces):
        if start == n:
            m = mono(*pieces)
            out[m] = out.get(m, 0) + (-1) ** len(pieces)
            return
        for c in cuts:
            if c > start:
                walk(c, pieces + [p[start:c]])

    walk(0, [])
    return HopfElement.of(out)


def laurent_mul(a, b):
    out = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = out.get(i + j, 0) + x * y
    return {k: v for k, v in out.items() if v}


def laurent_add(a, b):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v
    return {k: v for k, v in out.items() if v}


avalue_terms = st.dictionaries(st.integers(-3, 5), st.fractions(max_denominator=12).filter(bool),
                               max_size=6)


# -- cuts and coproduct -------------------------------------------------------------------


def test_valid_cuts_examples():
    assert valid_cuts(Program.of(INC(1), INC(1))) == (0, 1, 2)
    assert valid_cuts(Program.of(JZ(1, 2), INC(1))) == (0, 2)


def test_valid_cuts_match_oracle_and_reconcatenate():
    for p in SMALL:
        cuts = valid_cuts(p)
        assert cuts == oracle_cuts(p)
        assert all(p[:i] + p[i:] == p for i in cuts)
        assert nested_cut_coherent(p)


def test_coproduct_examples():
    assert coproduct(gen(A)) == {(mono(A), ()): 1, ((), mono(A)): 1}
    assert coproduct(gen(AB)) == {(mono(AB), ()): 1, (mono(A), mono(B)): 1, ((), mono(AB)): 1}
    assert format_tensor(coproduct(gen(AB))) == "1⊗[INC 1; DEC 2] + [INC 1]⊗[DEC 2] + [INC 1; DEC 2]⊗1"


def test_coproduct_is_multiplicative():
    rng = random.Random(1)
    for _ in range(50):
        p, q = rng.choice(SMALL), rng.choice(SMALL)
        lhs = coproduct(gen(p) * gen(q))
        dp, dq = coproduct(gen(p)), coproduct(gen(q))
        rhs = {}
        for (a1, b1), c1 in dp.items():
            for (a2, b2), c2 in dq.items():
                key = (mono(*a1, *a2), mono(*b1, *b2))
                rhs[key] = rhs.get(key, 0) + c1 * c2
        assert lhs == {k: v for k, v in rhs.items() if v}


def test_counit():
    assert counit(HopfElement.unit()) == 1
    assert counit(gen(AB)) == 0
    assert counit(gen(A) * gen(B) + HopfElement.unit() * 3) == 3


# -- antipode and laws --------------------------------------------------------------


def test_antipode_examples():
    assert antipode(gen(A)) == -gen(A)
    assert antipode(gen(AB)) == -gen(AB) + gen(A) * gen(B)
    assert format_element(antipode(gen(AB))) == "-[INC 1; DEC 2] + [INC 1]*[DEC 2]"
    assert antipode(HopfElement.unit()) == HopfElement.unit()


def test_antipode_matches_closed_form():
    for p in SMALL[::7]:
        assert antipode(gen(p)) == oracle_antipode(p)


def test_laws_on_size_five_sample():
    rng = random.Random(5)
    for _ in range(200):
        assert check_laws(random_program(rng, rng.randint(1, 5)))


def test_laws_exhaustive_small():
    rep = check_laws_exhaustive(4, literal_size=3)
    assert rep.passed
    assert rep.literal_programs == expected_program_count(4, 2, 2) == sum(1 for _ in enumerate_programs(4, 2, 2))


def test_antipode_convolution_zero_on_generators():
    for p in SMALL[::11]:
        assert convolve(antipode, lambda x: x, gen(p)).is_zero()


# -- subtraction algebra ---------------------------------------------------------------


def test_pi_minus_examples():
    assert pi_minus(U_INV) == U_INV
    v = AValue.from_terms({0: Fraction(5, 4), 1: Fraction(-1, 4)})
    assert pi_minus(v) == ZERO
    assert format_avalue(U_INV) == "u^-1"


@given(avalue_terms, avalue_terms)
def test_avalue_arithmetic_matches_oracle(a, b):
    x, y = AValue.from_terms(a), AValue.from_terms(b)
    assert (x * y).terms() == laurent_mul(a, b)
    assert (x + y).terms() == laurent_add(a, b)
    assert (x - x).is_zero()
    assert hash(AValue.from_terms(a)) == hash(x)


@given(avalue_terms, avalue_terms)
def test_rota_baxter(a, b):
    x, y = AValue.from_terms(a), AValue.from_terms(b)
    pi = pi_minus
    assert pi(x) * pi(y) + pi(x * y) == pi(x * pi(y)) + pi(pi(x) * y)
    assert pi(pi(x)) == pi(x)
    assert pi(x) + x.regular() == x


@given(st.lists(st.fractions(max_denominator=20), max_size=8), st.fractions(max_denominator=9))
def test_rebase_preserves_value(coeffs, z):
    v = AValue.from_z_poly(coeffs)
    assert v.evaluate(1 - z) == sum(c * z**n for n, c in enumerate(coeffs))


# -- characters --------------------------------------------------------------------


def test_halting_character_values():
    phi = char_from_halting(1, 1)
    assert phi(Program.of(JMP(0))) == U_INV
    assert phi(EMPTY) == ONE
    # f(1) = 1 at N = 1: 1 + z/4 = 5/4 - u/4
    assert phi(parse_program("DEC 1; INC 1")) == AValue.from_terms({0: Fraction(5, 4), 1: Fraction(-1, 4)})
    assert halting_value(1, 1) == AValue.from_terms({0: Fraction(5, 4), 1: Fraction(-1, 4)})


def test_halting_value_is_rebased_series():
    for v in (1, 2, 5):
        N = 6
        expected = {}
        for n in range(N + 1):
            c = Fraction(1, (1 + n * v) ** 2)
            for j in range(n + 1):
                expected[j] = expected.get(j, 0) + c * comb(n, j) * (-1) ** j
        assert halting_value(v, N).terms() == {j: c for j, c in expected.items() if c}


def test_character_multiplicative():
    rng = random.Random(8)
    phi = char_from_halting(2, 4, BudgetPolicy(2000, 4096))
    certified = certified_at(2, SMALL[:3000:7])
    for _ in range(100):
        x = gen(rng.choice(certified)) * gen(rng.choice(certified)) + gen(rng.choice(certified)) * 2
        y = gen(rng.choice(certified)) - HopfElement.unit()
        assert phi(x * y) == phi(x) * phi(y)
    assert phi(HopfElement.unit()) == ONE


def test_uncertified_generator():
    with pytest.raises(UncertifiedGenerator):
        char_from_halting(1, 2, BudgetPolicy(50, 4096))(COUNTER)


# -- convolution -------------------------------------------------------------------


def test_counit_is_convolution_unit():
    phi = char_from_halting(1, 3, BudgetPolicy(2000, 4096))
    for p in certified_at(1, SMALL[:400:13]):
        assert convolve(counit_value, phi, gen(p)) == phi(gen(p))
        assert convolve(phi, counit_value, gen(p)) == phi(gen(p))


def test_convolution_associative():
    f, g, h = (char_from_halting(k, 2, BudgetPolicy(2000, 4096)) for k in (1, 2, 3))
    fg = lambda x: convolve(f, g, x)  # noqa: E731
    gh = lambda x: convolve(g, h, x)  # noqa: E731
    for p in [q for q in SMALL if len(q) <= 3][::17]:
        try:
            lhs = convolve(fg, h, gen(p))
        except UncertifiedGenerator:
            continue
        assert lhs == convolve(f, gh, gen(p))


# -- Birkhoff --------------------------------------------------------------------------


def test_birkhoff_primitives():
    phi = char_from_halting(1, 1)
    a, b = Program.of(JMP(0)), Program.of(INC(1))
    pair = birkhoff_decompose(phi, 1, [a, b])
    assert pair.phi_minus[a] == -U_INV and pair.phi_plus[a] == ZERO
    assert pair.phi_minus[b] == ZERO and pair.phi_plus[b] == phi(b)
    assert pair.all_identities_hold()


def test_birkhoff_mixed():
    phi = char_from_halting(1, 1)
    a, b = Program.of(JMP(0)), Program.of(INC(1))
    ab = a + b
    pair = birkhoff_decompose(phi, 2, [a, b, ab])
    # phi(ab) = u^-1, phi(b) = R = 10/9 - u/9; polar part of u^-1 R is R(0) u^-1 = 10/9 u^-1
    R = phi(b)
    assert R == AValue.from_terms({0: Fraction(10, 9), 1: Fraction(-1, 9)})
    assert pair.phi_bar[ab] == U_INV - U_INV * R
    assert pair.phi_bar[ab] == AValue.from_terms({-1: Fraction(-1, 9), 0: Fraction(1, 9)})
    assert pair.phi_minus[ab] == AValue.from_terms({-1: Fraction(1, 9)})
    assert pair.phi_plus[ab] == AValue.const(Fraction(1, 9))
    assert pair.identity_holds[ab]


def test_birkhoff_grade_three_all_hold():
    phi = char_from_halting(2, 4, BudgetPolicy(2000, 4096))
    pair = birkhoff_decompose(phi, 3, skip_uncertified=True)
    assert pair.all_identities_hold()
    for p, v in pair.phi_plus.items():
        assert v.is_polar_free() and pair.phi_minus[p].is_polar_plus_constant()


def test_birkhoff_propagates_uncertified():
    with pytest.raises(UncertifiedGenerator):
        birkhoff_decompose(char_from_halting(1, 2, BudgetPolicy(50, 4096)), 2, [COUNTER])
    pair = birkhoff_decompose(char_from_halting(1, 2, BudgetPolicy(50, 4096)), 2, [COUNTER],
                              skip_uncertified=True)
    assert pair.excluded == [COUNTER] and pair.identity_holds == {}


def test_avalue_json():
    assert avalue_json(U_INV) == {"-1": "1/1"}
    assert str(ZERO) == "0"
