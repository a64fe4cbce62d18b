import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from haltren.errors import CertificateViolation, OutOfRange
from haltren.numberings import (
    BIN, CANTOR, COPROD, R_LINEAR, R_POW2, Convergent, RSequence, bin_number, bin_unnumber,
    cantor_pair, cantor_unpair, coprod_number, coprod_unnumber, nr_compare, nr_number,
    nr_numbering, nr_rank_by_counting, nr_unnumber,
)


def brute_ranks(R, M):
    """Ranks of every pair with k*R_l <= M, by sorting on (k*R_l, l)."""
    pairs = []
    l = 1
    while R(l) <= M:
        k = 1
        while k * R(l) <= M:
            pairs.append((k, l))
            k += 1
        l += 1
    pairs.sort(key=lambda kl: (kl[0] * Fraction(R(kl[1])), kl[1]))
    return {kl: i + 1 for i, kl in enumerate(pairs)}


def test_coprod_examples():
    assert coprod_number(2, 1) == (1, 1)
    assert coprod_number(2, 2) == (2, 1)
    assert coprod_unnumber(3, 2, 4) == 11 and coprod_number(3, 11) == (2, 4)
    with pytest.raises(OutOfRange):
        coprod_unnumber(2, 3, 1)


@given(st.integers(1, 5), st.integers(1, 10**9))
def test_coprod_roundtrip(m, n):
    assert coprod_unnumber(m, *coprod_number(m, n)) == n


def test_bin_examples():
    assert bin_number(1) == ""
    assert (bin_number(2), bin_number(3)) == ("0", "1")
    assert bin_unnumber("00") == 4


@given(st.integers(1, 10**12))
def test_bin_roundtrip(n):
    assert bin_unnumber(bin_number(n)) == n


def test_cantor_examples_and_grid():
    assert cantor_pair(1, 1) == 1
    assert (cantor_pair(1, 2), cantor_pair(2, 1)) == (2, 3)
    seen = set()
    for k in range(1, 501):
        for l in range(1, 501):
            n = cantor_pair(k, l)
            assert cantor_unpair(n) == (k, l)
            seen.add(n)
    assert len(seen) == 250_000


@given(st.integers(1, 10**15))
def test_cantor_roundtrip(n):
    assert cantor_pair(*cantor_unpair(n)) == n


def test_nr_compare_examples():
    assert nr_compare((1, 1), (2, 1), R_POW2) < 0
    assert nr_compare((2, 1), (1, 2), R_POW2) < 0
    assert nr_compare((3, 2), (3, 2), R_POW2) == 0


def test_nr_pow2_first_values():
    expected = {(1, 1): 1, (2, 1): 2, (1, 2): 3, (3, 1): 4, (4, 1): 5, (2, 2): 6, (1, 3): 7}
    for kl, n in expected.items():
        assert nr_number(*kl, R_POW2) == n
        assert nr_unnumber(n, R_POW2) == kl
    assert nr_number(1, 3) <= 1 * (1 * 8 + 1)


@pytest.mark.parametrize("R", [R_POW2, R_LINEAR], ids=lambda r: r.name)
def test_nr_matches_brute_force(R):
    M = 600
    ranks = brute_ranks(R, M)
    for kl, n in ranks.items():
        assert nr_number(*kl, R) == n
        assert nr_rank_by_counting(*kl, R) == n


@pytest.mark.parametrize("R", [R_POW2, R_LINEAR], ids=lambda r: r.name)
def test_shell_property(R):
    nr = nr_numbering(R)
    for M in range(1, 400):
        shell = nr.shell(M)
        assert [nr.number(*kl) for kl in shell] == list(range(1, len(shell) + 1))


def test_linear_bound_small_grid():
    for k in range(1, 60):
        for l in range(1, 60):
            v = k * l + 1
            assert nr_number(k, l, R_LINEAR) <= v * (1 + math.log(v))


def test_certificates_verify():
    R_POW2.verify_certificate(2000)
    R_LINEAR.verify_certificate(2000)
    broken = RSequence("broken", lambda l: 2**l, Convergent(Fraction(1, 2)))
    with pytest.raises(CertificateViolation):
        broken.verify_certificate(10)


@given(st.integers(1, 10**4))
def test_numbering_objects_roundtrip(n):
    for m in range(1, 6):
        assert COPROD[m].backward(COPROD[m].forward(n)) == n
    assert BIN.backward(BIN.forward(n)) == n
    assert CANTOR.backward(CANTOR.forward(n)) == n
    for R in (R_POW2, R_LINEAR):
        num = nr_numbering(R).as_numbering()
        assert num.backward(num.forward(n)) == n
