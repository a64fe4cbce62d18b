"""Shared fixtures and an independent reference interpreter used as the test oracle."""

from __future__ import annotations

import os

import pytest
from hypothesis import HealthCheck, settings

from haltren.machine import Op, Program, parse_program

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=300,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# computes 2x: pour r1 into r2 twice over, then back
DOUBLING = parse_program("JZ 1 5; DEC 1; INC 2; INC 2; JMP -4; JZ 2 4; DEC 2; INC 1; JMP -3")

# alternately pours r1 into r2 and back, shrinking by one per pass: about 2x^2 steps
QUADRATIC = parse_program(
    "DEC 1; JZ 1 4; DEC 1; INC 2; JMP -3; JZ 2 8; DEC 2; JZ 2 4; DEC 2; INC 1; JMP -3; JZ 1 2; JMP -12"
)

SELF_LOOP = parse_program("JMP 0")
COUNTER = parse_program("INC 1; JMP -1")  # grows forever, never repeats


def reference_run(p: Program, x: int, step_limit: int):
    """Naive interpreter with unbounded cycle detection.

    Returns ``("halted", value, t, m, s)``, ``("divergent", start, period)`` or
    ``("unknown",)``. Footprint is counted after every step.
    """
    code = [(ins.op, ins.reg, ins.offset) for ins in p]
    regs = {1: x}
    pc = t = m = s = 0
    seen = {(0, ((1, x),) if x else ()): 0}
    while pc != len(code):
        if t >= step_limit:
            return ("unknown",)
        op, r, d = code[pc]
        if op == Op.INC:
            regs[r] = regs.get(r, 0) + 1
            pc += 1
        elif op == Op.DEC:
            regs[r] = max(0, regs.get(r, 0) - 1)
            pc += 1
        elif op == Op.JZ:
            pc = pc + d if regs.get(r, 0) == 0 else pc + 1
        else:
            pc += d
        t += 1
        fp = sum(1 + len(bin(v)) - 2 for v in regs.values() if v)
        m = max(m, fp)
        s += fp
        key = (pc, tuple(sorted((k, v) for k, v in regs.items() if v)))
        if key in seen:
            return ("divergent", seen[key], t - seen[key])
        seen[key] = t
    return ("halted", regs.get(1, 0), t, m, s)


@pytest.fixture(scope="session")
def small_table():
    from haltren.complexity import complexity_table

    return complexity_table(256, 3000)
