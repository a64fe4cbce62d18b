"""Kernel selection: compiled ``_kernel`` when importable, else ``_pykernel``.

Set ``HALTREN_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernel

try:
    if os.environ.get("HALTREN_PURE_PYTHON"):
        raise ImportError("pure Python requested")
    from . import _kernel as _compiled
except ImportError:
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def run_compiled(ops, regs, targets, nregs, x, step_budget, space_budget):
    if _compiled is not None:
        try:
            return _compiled.run_compiled(ops, regs, targets, nregs, x, step_budget, space_budget)
        except OverflowError:
            pass
    return _pykernel.run_compiled(ops, regs, targets, nregs, x, step_budget, space_budget)


def scan_skeletons(max_size, registers, max_offset):
    if _compiled is not None:
        return _compiled.scan_skeletons(max_size, registers, max_offset)
    return _pykernel.scan_skeletons(max_size, registers, max_offset)
