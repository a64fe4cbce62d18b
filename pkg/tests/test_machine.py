import random
from itertools import product

import pytest
from hypothesis import given, strategies as st

from haltren.errors import DuplicateKey, InvalidInput, InvalidProgram, ProgramSyntaxError
from haltren.machine import (
    DEC, EMPTY, INC, JMP, JZ, BudgetPolicy, CostTriple, Halted, MachineConfig, Program,
    ProvenDivergent, Unknown, alphabet, compose_hygienic, compose_raw, decode_program,
    encode_program, enumerate_programs, eval_fn, format_program, in_domain, is_hygienic,
    parallel_eval, parse_program, random_program, run, tab_translate, trace,
)

from .conftest import COUNTER, DOUBLING, SELF_LOOP, reference_run


def programs(max_size=5):
    return st.builds(
        lambda seed, n: random_program(random.Random(seed), n),
        st.integers(0, 2**32), st.integers(0, max_size),
    )


# -- run ----------------------------------------------------------------------------


def test_single_increment():
    out = run(Program.of(INC(1)), 5, 100, 100)
    assert out == Halted(6, CostTriple(1, 4, 4))


def test_empty_program_is_identity_with_zero_cost():
    assert run(EMPTY, 7, 100, 100) == Halted(7, CostTriple(0, 0, 0))


def test_self_loop_is_proven_divergent_after_one_step():
    assert run(SELF_LOOP, 1, 100, 100) == ProvenDivergent(0, 1)


def test_eval_fn_examples():
    assert eval_fn(EMPTY, 3).value == 3
    assert eval_fn(Program.of(INC(1), INC(1)), 1).value == 3
    assert isinstance(eval_fn(Program.of(JZ(1, 2), JMP(0)), 2), ProvenDivergent)


def test_dec_saturates():
    assert run(parse_program("DEC 1; DEC 1; DEC 1"), 1, 10, 10).value == 0


def test_unknown_carries_budget():
    assert run(COUNTER, 1, 50, 4096) == Unknown(50)


def test_space_budget_disables_detection():
    # the initial footprint already exceeds the space budget, so the self-loop stays unproven
    assert isinstance(run(SELF_LOOP, 2**40, 10, 4), Unknown)


def test_invalid_program_and_input():
    with pytest.raises(InvalidProgram):
        run(Program.of(JMP(3)), 1, 10, 10)
    with pytest.raises(InvalidInput):
        run(EMPTY, 0, 10, 10)


def test_doubling_program():
    for x in range(1, 30):
        assert run(DOUBLING, x, 10_000, 4096).value == 2 * x


@given(programs(), st.integers(1, 12))
def test_run_matches_reference(p, x):
    ours = run(p, x, 3000, 1 << 20)
    ref = reference_run(p, x, 3000)
    if isinstance(ours, Halted):
        assert ref == ("halted", ours.value, ours.cost.t, ours.cost.m, ours.cost.s)
    elif isinstance(ours, ProvenDivergent):
        assert ref == ("divergent", ours.cycle_start_step, ours.period)
    else:
        assert ref == ("unknown",)


@given(programs(), st.integers(1, 12))
def test_cycle_detection_replays(p, x):
    out = run(p, x, 2000, 1 << 20)
    if isinstance(out, ProvenDivergent):
        configs = []
        for c in trace(p, x):
            configs.append(c)
            if len(configs) > out.cycle_start_step + out.period:
                break
        assert configs[out.cycle_start_step] == configs[out.cycle_start_step + out.period]


@given(programs(), st.integers(1, 12))
def test_cost_invariants(p, x):
    out = run(p, x, 2000, 4096)
    if isinstance(out, Halted):
        c = out.cost
        if c.t >= 1:
            assert c.m <= c.s
        if not len(p):
            assert c == CostTriple(0, 0, 0)


def test_machine_config_normalizes_zeros():
    assert MachineConfig.of(1, {1: 3, 2: 0}) == MachineConfig.of(1, {1: 3})


def test_in_domain_excludes_zero_output():
    assert in_domain(Halted(1, CostTriple(0, 0, 0)))
    assert not in_domain(Halted(0, CostTriple(1, 0, 0)))
    assert not in_domain(ProvenDivergent(0))


# -- composition ----------------------------------------------------------------------


def test_compose_raw_identities_and_size():
    p = Program.of(INC(1), JZ(1, 1))
    assert compose_raw(p, EMPTY) == p == compose_raw(EMPTY, p)
    assert compose_raw(Program.of(INC(1)), Program.of(INC(1))) == Program.of(INC(1), INC(1))


@given(programs(), programs())
def test_compose_raw_size_additive(p, q):
    r = compose_raw(p, q)
    assert len(r) == len(p) + len(q) and r.is_valid


def test_compose_raw_associative_on_small_triples():
    small = list(enumerate_programs(1, 2, 2))
    for a, b, c in product(small, repeat=3):
        assert compose_raw(compose_raw(a, b), c) == compose_raw(a, compose_raw(b, c))


@given(programs(3), programs(3), programs(3))
def test_compose_raw_associative(a, b, c):
    assert compose_raw(compose_raw(a, b), c) == compose_raw(a, compose_raw(b, c))


def test_compose_hygienic_examples():
    p = Program.of(INC(1))
    q = Program.of(INC(1), INC(1))
    assert compose_hygienic(p, q) == compose_raw(p, q)
    r = compose_hygienic(EMPTY, Program.of(INC(2)))
    for x in range(1, 6):
        out = run(r, x, 100, 100)
        assert out.value == x and not out.scratch()


def test_compose_hygienic_semantics_on_random_pairs():
    rng = random.Random(7)
    policy = BudgetPolicy(5000, 4096)
    checked = 0
    while checked < 200:
        p, q = random_program(rng, rng.randint(0, 4)), random_program(rng, rng.randint(0, 4))
        x = rng.randint(1, 10)
        fq = eval_fn(q, x, policy)
        if not isinstance(fq, Halted) or fq.value < 1:
            continue
        fp = eval_fn(p, fq.value, policy)
        if not isinstance(fp, Halted):
            continue
        assert eval_fn(compose_hygienic(p, q), x, BudgetPolicy(50_000, 1 << 16)).value == fp.value
        checked += 1


@given(programs(4), programs(4))
def test_compose_hygienic_output_hygienic_when_parts_are(p, q):
    p = compose_hygienic(EMPTY, p)
    r = compose_hygienic(p, q)
    assert is_hygienic(r, range(1, 6), BudgetPolicy(20_000, 1 << 16))


def test_is_hygienic_examples():
    assert is_hygienic(EMPTY, [1, 2, 3])
    v = is_hygienic(Program.of(INC(2)), [4])
    assert not v and v.witness == 4 and v.scratch == {2: 1}


# -- parallel -----------------------------------------------------------------------


def test_parallel_examples():
    res = parallel_eval([(EMPTY, 1), (EMPTY, 2)])
    assert [o.value for o in res.outcomes] == [1, 2] and res.joint.t == 0
    res = parallel_eval([(Program.of(INC(1)), 1), (EMPTY, 9)])
    assert res.joint.t == 1


@given(st.lists(st.tuples(programs(4), st.integers(1, 9)), min_size=1, max_size=5), st.randoms())
def test_parallel_equivariant(spec, rnd):
    order = list(range(len(spec)))
    rnd.shuffle(order)
    base = parallel_eval(spec, BudgetPolicy(2000, 4096))
    perm = parallel_eval([spec[i] for i in order], BudgetPolicy(2000, 4096))
    assert list(perm.outcomes) == [base.outcomes[i] for i in order]
    assert perm.joint == base.joint


# -- codes -------------------------------------------------------------------------


def test_code_roundtrip_single():
    p = Program.of(INC(1))
    assert decode_program(encode_program(p)).program == p
    assert encode_program(EMPTY) == 1


def test_code_roundtrip_and_injective_size3():
    seen = {}
    for p in enumerate_programs(3, 2, 2):
        n = encode_program(p)
        assert n not in seen
        seen[n] = p
        d = decode_program(n)
        assert d.canonical and d.program == p
    assert len(seen) == 3508


@given(st.integers(1, 10**12))
def test_decode_total(n):
    d = decode_program(n)
    assert d.program.is_valid
    if d.canonical:
        assert encode_program(d.program) == n
    else:
        assert d.program == EMPTY


# -- table translation --------------------------------------------------------------


def test_tab_translate_examples():
    trap = tab_translate([])
    assert all(isinstance(run(trap, x, 100, 100), ProvenDivergent) for x in range(1, 5))
    one = tab_translate([(1, 5)])
    assert run(one, 1, 100, 100).value == 5
    assert isinstance(run(one, 2, 100, 100), ProvenDivergent)
    with pytest.raises(DuplicateKey):
        tab_translate([(1, 2), (1, 3)])


def test_tab_translate_agrees_on_random_tables():
    rng = random.Random(3)
    for _ in range(50):
        keys = rng.sample(range(1, 15), rng.randint(0, 6))
        table = {x: rng.randint(0, 12) for x in keys}
        p = tab_translate(table.items())
        for x in range(1, 18):
            out = run(p, x, 10_000, 4096)
            if x in table:
                assert out == Halted(table[x], out.cost)
            else:
                assert isinstance(out, ProvenDivergent)


# -- text format -------------------------------------------------------------------


def test_parse_and_format():
    text = "INC 1  # bump\nJZ 2 -1\nJMP 1\n"
    p = parse_program(text)
    assert p == Program.of(INC(1), JZ(2, -1), JMP(1))
    assert parse_program(format_program(p)) == p
    with pytest.raises(ProgramSyntaxError):
        parse_program("INC")
    with pytest.raises(InvalidProgram):
        parse_program("JMP 5")


def test_alphabet_size():
    assert len(alphabet(2, 2)) == 2 + 2 + 10 + 5
