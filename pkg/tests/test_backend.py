import os
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from haltren import _backend, _pykernel
from haltren.machine import enumerate_programs, random_program

from .conftest import QUADRATIC

compiled = _backend._compiled
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled kernel not built")

SMALL = list(enumerate_programs(3, 2, 2))


@needs_compiled
@given(st.sampled_from(SMALL), st.integers(0, 300), st.integers(1, 500), st.integers(1, 64))
def test_run_matches_fallback(p, x, steps, space):
    args = (*p.lowered, x, steps, space)
    assert compiled.run_compiled(*args) == _pykernel.run_compiled(*args)


@needs_compiled
@given(st.integers(0, 2**32), st.integers(1, 8), st.integers(1, 50))
def test_run_matches_fallback_random_programs(seed, size, x):
    import random

    p = random_program(random.Random(seed), size)
    args = (*p.lowered, x, 5000, 4096)
    assert compiled.run_compiled(*args) == _pykernel.run_compiled(*args)


@needs_compiled
def test_run_matches_fallback_long_run():
    for x in (1, 17, 60):
        args = (*QUADRATIC.lowered, x, 10 * x * x, 1 << 16)
        assert compiled.run_compiled(*args) == _pykernel.run_compiled(*args)


def test_large_values_fall_back():
    # values past a machine word must still be exact
    p = next(q for q in SMALL if len(q) == 0)
    out = _backend.run_compiled(*p.lowered, 1 << 80, 10, 4096)
    assert out[1] == 1 << 80


@needs_compiled
@pytest.mark.parametrize("size", [0, 1, 2, 3])
def test_scan_skeletons_matches_fallback(size):
    assert compiled.scan_skeletons(size, 2, 2) == _pykernel.scan_skeletons(size, 2, 2)


def test_pure_python_switch():
    env = dict(os.environ, HALTREN_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from haltren import _backend; print(_backend.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
