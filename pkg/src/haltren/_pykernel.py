"""Pure-Python kernels. Same signatures and results as the compiled ``_kernel``.

Programs arrive pre-lowered: ``ops[i]`` is the opcode (0 INC, 1 DEC, 2 JZ,
3 JMP), ``regs[i]`` the zero-based register slot, ``targets[i]`` the absolute
jump target.
"""

from __future__ import annotations

from itertools import product

HALTED = 0
DIVERGENT = 1
UNKNOWN = 2

NO_JUMP = -(1 << 30)


def _contrib(v: int) -> int:
    return 1 + v.bit_length() if v else 0


def run_compiled(ops, regs, targets, nregs, x, step_budget, space_budget):
    """Run a lowered program on input ``x``.

    Returns ``(status, value, t, m, s, cycle_start, period, registers)``.
    """
    size = len(ops)
    r = [0] * nregs
    r[0] = x
    fp = _contrib(x)
    pc = 0
    t = m = s = 0
    detecting = fp <= space_budget
    seen = {(0, *r): 0} if detecting else None
    while pc != size:
        if t >= step_budget:
            return UNKNOWN, 0, t, m, s, -1, 0, tuple(r)
        op = ops[pc]
        if op == 0:
            i = regs[pc]
            v = r[i]
            r[i] = v + 1
            fp += _contrib(v + 1) - _contrib(v)
            pc += 1
        elif op == 1:
            i = regs[pc]
            v = r[i]
            if v:
                r[i] = v - 1
                fp += _contrib(v - 1) - _contrib(v)
            pc += 1
        elif op == 2:
            pc = targets[pc] if r[regs[pc]] == 0 else pc + 1
        else:
            pc = targets[pc]
        t += 1
        if fp > m:
            m = fp
        s += fp
        if detecting:
            if fp > space_budget:
                detecting = False
                seen = None
            else:
                key = (pc, *r)
                prev = seen.get(key)
                if prev is not None:
                    return DIVERGENT, 0, t, m, s, prev, t - prev, tuple(r)
                seen[key] = t
    return HALTED, r[0], t, m, s, -1, 0, tuple(r)


def cut_mask(offsets, a: int, b: int) -> int:
    """Bitmask of valid cuts (relative to ``a``) of the slice ``[a, b)``.

    ``offsets[j]`` is the relative jump offset at ``j`` or ``NO_JUMP``.
    """
    mask = 0
    for c in range(a, b + 1):
        ok = True
        for j in range(a, b):
            d = offsets[j]
            if d == NO_JUMP:
                continue
            tgt = j + d
            if (j < c < tgt) or (tgt < c <= j):
                ok = False
                break
        if ok:
            mask |= 1 << (c - a)
    return mask


def coherent(offsets, n: int) -> bool:
    """Nested-cut coherence of one program of size ``n``."""
    full = cut_mask(offsets, 0, n)
    if not (full & 1) or not (full >> n) & 1:
        return False
    for i in range(n + 1):
        if not (full >> i) & 1:
            continue
        below = full & ((1 << (i + 1)) - 1)
        if cut_mask(offsets, 0, i) != below:
            return False
        if cut_mask(offsets, i, n) != full >> i:
            return False
    return True


def skeleton_code(offsets, n: int, max_offset: int) -> int:
    base = 2 * max_offset + 2
    code = 0
    for j in range(n):
        d = offsets[j]
        digit = 0 if d == NO_JUMP else 1 + d + max_offset
        code = code * base + digit
    return code


def _letters(n: int, pos: int, registers: int, max_offset: int) -> list[int]:
    # one entry per literal instruction valid at ``pos``: its offset or NO_JUMP
    out = [NO_JUMP] * (2 * registers)
    for d in range(-max_offset, max_offset + 1):
        if 0 <= pos + d <= n:
            out.extend([d] * (registers + 1))
    return out


def scan_skeletons(max_size, registers, max_offset):
    """Visit every valid program up to ``max_size`` over the given alphabet.

    Returns ``(total, violations, counts)`` where ``counts`` maps
    ``(size, skeleton_code)`` to the number of literal programs in that class.
    """
    total = 0
    violations = 0
    counts: dict[tuple[int, int], int] = {}
    for n in range(max_size + 1):
        columns = [_letters(n, pos, registers, max_offset) for pos in range(n)]
        for offsets in product(*columns):
            total += 1
            if not coherent(offsets, n):
                violations += 1
            key = (n, skeleton_code(offsets, n, max_offset))
            counts[key] = counts.get(key, 0) + 1
    return total, violations, counts
