import json

import pytest

from haltren.complexity import (
    ComplexityTable, KOrderTable, SweepRecord, cache_dir, cache_path, complexity_table,
    decode_index, kolmogorov_order, sweep, universal_u,
)
from haltren.errors import CacheMismatch, EmptyCertifiedSet
from haltren.machine import EMPTY, Halted, decode_program
from haltren.numberings import R_POW2, nr_number, nr_unnumber

from .conftest import reference_run


def oracle_first_hits(T, K_max):
    """First index hitting each value, and the resolved prefix, via the reference interpreter."""
    hits, resolved, blocked = {}, 0, False
    for y in range(1, K_max + 1):
        k, j = nr_unnumber(y)
        out = reference_run(decode_program(j).program, k, T)
        if out[0] == "unknown":
            blocked = True
        elif not blocked:
            resolved = y
        if out[0] == "halted" and out[1] >= 1 and out[1] not in hits:
            hits[out[1]] = y
    return hits, resolved


def test_matches_oracle():
    table = complexity_table(64, 800)
    hits, resolved = oracle_first_hits(64, 800)
    assert table.resolved_prefix == resolved
    assert {x: e.upper for x, e in table.entries.items()} == hits
    assert all(e.certified == (e.upper <= resolved) for e in table.entries.values())


def test_first_records():
    table = complexity_table(64, 10)
    assert table.records[0] == SweepRecord(1, 1, 1, "halted", 1, 0, True)
    assert table.complexity(1) == 1 and table.complexity(2) == 2
    assert all(table.upper_bound(x) >= 1 for x in table.entries)


def test_universal_u_on_empty_program():
    for k in range(1, 6):
        y = nr_number(k, 1)
        kk, j, decoded = decode_index(y)
        assert (kk, j, decoded.program) == (k, 1, EMPTY)
        assert universal_u(y, 10, 10) == Halted(k, universal_u(y, 10, 10).cost)


def test_index_growth_is_linear_in_input():
    # N_R(k, j) <= c (k R_j + 1) <= k * (R_j + 1) with c = 1
    for k in range(1, 80):
        for j in range(1, 12):
            assert nr_number(k, j) <= k * (R_POW2(j) + 1)


def test_monotone_in_budget_and_certified_stable():
    tables = [complexity_table(T, 1500) for T in (16, 32, 64, 128)]
    for lo, hi in zip(tables, tables[1:]):
        for x, e in lo.entries.items():
            assert hi.upper_bound(x) <= e.upper
            if e.certified:
                assert hi.is_certified(x) and hi.complexity(x) == e.upper


def test_parallel_sweep_is_order_independent():
    assert sweep(range(1, 1500), 64, 4096, workers=3, chunk=200) == sweep(range(1, 1500), 64, 4096)


def test_complexity_raises_when_uncertified(small_table):
    x = max(small_table.entries)
    if not small_table.is_certified(x):
        with pytest.raises(KeyError):
            small_table.complexity(x)


def test_from_records_rejects_gaps():
    recs = [SweepRecord(1, 1, 1, "halted", 1, 0), SweepRecord(3, 2, 1, "halted", 2, 0)]
    with pytest.raises(ValueError):
        ComplexityTable.from_records(1, 1, 3, "pow2", recs)


# -- cache -------------------------------------------------------------------------


def test_cache_resume_equals_cold_run(tmp_path):
    cold = complexity_table(64, 900)
    complexity_table(64, 300, cache=tmp_path)
    warm = complexity_table(64, 900, cache=tmp_path)
    assert warm.records == cold.records and warm.entries == cold.entries
    again = complexity_table(64, 600, cache=tmp_path)
    assert again.records == cold.records[:600]


def test_cache_mismatch_and_rebuild(tmp_path):
    complexity_table(32, 100, cache=tmp_path)
    path = cache_path(tmp_path, 32, 4096, "pow2")
    lines = path.read_text().splitlines()
    head = json.loads(lines[0])
    head["alphabet"] = "0" * 16
    path.write_text("\n".join([json.dumps(head)] + lines[1:]) + "\n")
    with pytest.raises(CacheMismatch):
        complexity_table(32, 100, cache=tmp_path)
    rebuilt = complexity_table(32, 100, cache=tmp_path, rebuild=True)
    assert rebuilt.records == complexity_table(32, 100).records


def test_cache_short_file_is_mismatch(tmp_path):
    complexity_table(32, 100, cache=tmp_path)
    path = cache_path(tmp_path, 32, 4096, "pow2")
    path.write_text("\n".join(path.read_text().splitlines()[:50]) + "\n")
    with pytest.raises(CacheMismatch):
        complexity_table(32, 100, cache=tmp_path)


def test_cache_dir_env(monkeypatch, tmp_path):
    monkeypatch.setenv("HALTREN_CACHE_DIR", str(tmp_path))
    assert cache_dir() == tmp_path
    assert cache_dir("/x") == type(tmp_path)("/x")


# -- K order -----------------------------------------------------------------------


def test_korder_properties(small_table):
    korder = kolmogorov_order(small_table)
    certified = small_table.certified_values()
    assert sorted(korder.K(x) for x in certified) == list(range(1, len(certified) + 1))
    first = min(certified, key=lambda x: (small_table.complexity(x), x))
    assert korder.K(first) == 1
    for x in certified:
        assert korder.K(x) <= small_table.complexity(x)
        assert korder.inverse(korder.K(x)) == x
    assert 0 < korder.c0() <= 1


def test_korder_tie_break_by_value():
    k = KOrderTable.from_complexities({5: 3, 2: 3, 9: 1})
    assert k.order == [9, 2, 5]
    assert KOrderTable.identity(4).order == [1, 2, 3, 4]


def test_korder_empty():
    table = ComplexityTable.from_records(1, 1, 1, "pow2", [SweepRecord(1, 1, 1, "unknown", None, 1)])
    with pytest.raises(EmptyCertifiedSet):
        kolmogorov_order(table)
