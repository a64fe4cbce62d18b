"""Instrumented register machine: the concrete programming method.

Four opcodes with relative jumps and fall-off-the-end halting::

    INC r      r += 1
    DEC r      r -= 1, saturating at zero
    JZ r d     if r == 0 jump to (pc + d), else fall through
    JMP d      jump to (pc + d)

Register 1 carries input and output; every other register starts at zero.
Runs are budgeted and classify into :class:`Halted`, :class:`ProvenDivergent`
(an exact configuration repetition was observed) or :class:`Unknown`.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, NamedTuple, Sequence

from . import _backend
from .errors import DuplicateKey, InvalidInput, InvalidProgram, ProgramSyntaxError
from .numberings import cantor_pair, cantor_unpair, coprod_number, coprod_unnumber


class Op(IntEnum):
    INC = 0
    DEC = 1
    JZ = 2
    JMP = 3


class Instruction(NamedTuple):
    op: Op
    reg: int = 0  # 0 for JMP
    offset: int = 0  # 0 for INC/DEC

    def __str__(self) -> str:
        if self.op == Op.JMP:
            return f"JMP {self.offset}"
        if self.op == Op.JZ:
            return f"JZ {self.reg} {self.offset}"
        return f"{self.op.name} {self.reg}"

    @property
    def is_jump(self) -> bool:
        return self.op >= Op.JZ


def INC(r: int) -> Instruction:
    return Instruction(Op.INC, r, 0)


def DEC(r: int) -> Instruction:
    return Instruction(Op.DEC, r, 0)


def JZ(r: int, d: int) -> Instruction:
    return Instruction(Op.JZ, r, d)


def JMP(d: int) -> Instruction:
    return Instruction(Op.JMP, 0, d)


def _check_instruction(ins: Instruction) -> None:
    if ins.op in (Op.INC, Op.DEC, Op.JZ) and ins.reg < 1:
        raise InvalidProgram(f"register index must be >= 1 in {ins}")
    if ins.op == Op.JMP and ins.reg != 0:
        raise InvalidProgram("JMP takes no register")
    if ins.op in (Op.INC, Op.DEC) and ins.offset != 0:
        raise InvalidProgram(f"{ins.op.name} takes no offset")


@dataclass(frozen=True, order=True)
class Program:
    """An immutable instruction sequence. Slicing and ``+`` return Programs."""

    instructions: tuple[Instruction, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.instructions, tuple):
            object.__setattr__(self, "instructions", tuple(self.instructions))

    @classmethod
    def of(cls, *instructions: Instruction) -> Program:
        return cls(tuple(instructions))

    @property
    def size(self) -> int:
        return len(self.instructions)

    def __len__(self) -> int:
        return len(self.instructions)

    def __iter__(self) -> Iterator[Instruction]:
        return iter(self.instructions)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Program(self.instructions[item])
        return self.instructions[item]

    def __add__(self, other: Program) -> Program:
        return Program(self.instructions + other.instructions)

    def __str__(self) -> str:
        return "; ".join(str(i) for i in self.instructions)

    def __repr__(self) -> str:
        return f"Program({str(self)!r})"

    @cached_property
    def is_valid(self) -> bool:
        n = len(self.instructions)
        for i, ins in enumerate(self.instructions):
            try:
                _check_instruction(ins)
            except InvalidProgram:
                return False
            if ins.is_jump and not 0 <= i + ins.offset <= n:
                return False
        return True

    def validate(self) -> Program:
        for i, ins in enumerate(self.instructions):
            _check_instruction(ins)
            if ins.is_jump and not 0 <= i + ins.offset <= len(self.instructions):
                raise InvalidProgram(f"jump at {i} ({ins}) leaves [0, {len(self.instructions)}]")
        return self

    @cached_property
    def registers(self) -> frozenset[int]:
        """Registers mentioned by the program (register 1 always included)."""
        return frozenset({1} | {ins.reg for ins in self.instructions if ins.op != Op.JMP})

    @cached_property
    def lowered(self) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...], int]:
        self.validate()
        ops = tuple(int(ins.op) for ins in self.instructions)
        regs = tuple(max(ins.reg - 1, 0) for ins in self.instructions)
        targets = tuple(i + ins.offset for i, ins in enumerate(self.instructions))
        return ops, regs, targets, max(self.registers)


EMPTY = Program()


# -- outcomes -----------------------------------------------------------------


@dataclass(frozen=True)
class CostTriple:
    t: int  # steps executed
    m: int  # peak footprint
    s: int  # summed footprint over all steps

    def __add__(self, other: CostTriple) -> CostTriple:
        return CostTriple(self.t + other.t, max(self.m, other.m), self.s + other.s)


@dataclass(frozen=True)
class Halted:
    value: int
    cost: CostTriple
    registers: tuple[int, ...] = field(default=(), compare=False, repr=False)

    def scratch(self) -> dict[int, int]:
        """Nonzero registers other than register 1 at halt."""
        return {i + 1: v for i, v in enumerate(self.registers) if i and v}


@dataclass(frozen=True)
class ProvenDivergent:
    cycle_start_step: int
    period: int = 1


@dataclass(frozen=True)
class Unknown:
    budget: int


EvalOutcome = Halted | ProvenDivergent | Unknown


def is_certified(outcome: EvalOutcome) -> bool:
    return not isinstance(outcome, Unknown)


def in_domain(outcome: EvalOutcome) -> bool:
    """Certified membership in the domain of the computed map Z+ -> Z+.

    Halting with 0 in register 1 produces no positive value, so such inputs
    count as outside the domain.
    """
    return isinstance(outcome, Halted) and outcome.value >= 1


@dataclass(frozen=True)
class BudgetPolicy:
    step_budget: int = 10_000
    space_budget: int = 4_096

    def __post_init__(self) -> None:
        if self.step_budget < 1 or self.space_budget < 1:
            raise ValueError("budgets must be >= 1")


DEFAULT_POLICY = BudgetPolicy()


# -- execution ----------------------------------------------------------------


def _execute(p: Program, x: int, step_budget: int, space_budget: int) -> EvalOutcome:
    ops, regs, targets, nregs = p.lowered
    status, value, t, m, s, start, period, final = _backend.run_compiled(
        ops, regs, targets, nregs, x, step_budget, space_budget
    )
    if status == 0:
        return Halted(value, CostTriple(t, m, s), final)
    if status == 1:
        return ProvenDivergent(start, period)
    return Unknown(step_budget)


def run(p: Program, x: int, step_budget: int, space_budget: int) -> EvalOutcome:
    """Run ``p`` on ``x`` within the given step and space budgets.

    Cycle detection stores every configuration while the footprint stays
    within ``space_budget``; once it is exceeded detection stops for the rest
    of the run and a non-halting run can only end as :class:`Unknown`.
    """
    if not p.is_valid:
        p.validate()
    if x < 1:
        raise InvalidInput(f"input must be a positive natural, got {x}")
    if step_budget < 1 or space_budget < 1:
        raise ValueError("budgets must be >= 1")
    return _execute(p, x, step_budget, space_budget)


def eval_fn(p: Program, x: int, policy: BudgetPolicy = DEFAULT_POLICY) -> EvalOutcome:
    return run(p, x, policy.step_budget, policy.space_budget)


@dataclass(frozen=True)
class MachineConfig:
    pc: int
    registers: tuple[tuple[int, int], ...]  # nonzero (index, value) pairs, sorted

    @classmethod
    def of(cls, pc: int, values: dict[int, int]) -> MachineConfig:
        return cls(pc, tuple(sorted((r, v) for r, v in values.items() if v)))


def footprint(values: dict[int, int]) -> int:
    return sum(1 + v.bit_length() for v in values.values() if v)


def trace(p: Program, x: int) -> Iterator[MachineConfig]:
    """Yield the configuration sequence c_0, c_1, ... of ``p`` on ``x``.

    Unbudgeted and deliberately naive; used to replay and cross-check runs.
    """
    p.validate()
    reg: dict[int, int] = {1: x}
    pc = 0
    yield MachineConfig.of(pc, reg)
    while pc != len(p):
        ins = p[pc]
        if ins.op == Op.INC:
            reg[ins.reg] = reg.get(ins.reg, 0) + 1
            pc += 1
        elif ins.op == Op.DEC:
            reg[ins.reg] = max(reg.get(ins.reg, 0) - 1, 0)
            pc += 1
        elif ins.op == Op.JZ:
            pc = pc + ins.offset if reg.get(ins.reg, 0) == 0 else pc + 1
        else:
            pc += ins.offset
        yield MachineConfig.of(pc, reg)


# -- composition ----------------------------------------------------------------


def compose_raw(p: Program, q: Program) -> Program:
    """``p ∘ q``: run ``q`` then fall through into ``p``. Sizes add exactly."""
    return q + p


def cleanup_block(registers: Iterable[int]) -> Program:
    """Zero every listed register with a three-instruction DEC loop each."""
    out: list[Instruction] = []
    for r in sorted(set(registers)):
        out += [JZ(r, 3), DEC(r), JMP(-2)]
    return Program(tuple(out))


def compose_hygienic(p: Program, q: Program) -> Program:
    """``q``, then a block zeroing ``q``'s scratch registers, then ``p``."""
    return q + cleanup_block(q.registers - {1}) + p


@dataclass(frozen=True)
class HygieneVerdict:
    hygienic: bool
    witness: int | None = None
    scratch: dict[int, int] | None = None

    def __bool__(self) -> bool:
        return self.hygienic


def is_hygienic(
    p: Program, sample_inputs: Iterable[int], policy: BudgetPolicy = DEFAULT_POLICY
) -> HygieneVerdict:
    """Check on samples that ``p`` halts with every scratch register at zero.

    Non-halting samples carry no evidence either way and are skipped.
    """
    for x in sample_inputs:
        out = eval_fn(p, x, policy)
        if isinstance(out, Halted):
            dirty = out.scratch()
            if dirty:
                return HygieneVerdict(False, x, dirty)
    return HygieneVerdict(True)


@dataclass(frozen=True)
class ParallelResult:
    outcomes: tuple[EvalOutcome, ...]
    joint: CostTriple | None  # defined only when every member halted


def parallel_eval(
    spec: Sequence[tuple[Program, int]], policy: BudgetPolicy = DEFAULT_POLICY
) -> ParallelResult:
    """Evaluate members independently.

    Joint time is the member maximum, joint peak memory the sum of member
    peaks, joint cumulative space the sum of member totals.
    """
    outcomes = tuple(eval_fn(p, x, policy) for p, x in spec)
    joint = None
    if all(isinstance(o, Halted) for o in outcomes):
        costs = [o.cost for o in outcomes]
        joint = CostTriple(
            max((c.t for c in costs), default=0),
            sum(c.m for c in costs),
            sum(c.s for c in costs),
        )
    return ParallelResult(outcomes, joint)


# -- table translation ------------------------------------------------------------


def tab_translate(table: Iterable[tuple[int, int]]) -> Program:
    """Compile a finite partial function to a program.

    The result halts with ``y`` on each key ``x`` and falls into a self-loop
    (a provable cycle) everywhere else.
    """
    pairs = list(table)
    mapping: dict[int, int] = {}
    for x, y in pairs:
        if x in mapping:
            raise DuplicateKey(f"key {x} appears twice")
        if x < 1 or y < 0:
            raise ValueError(f"bad table entry ({x}, {y})")
        mapping[x] = y
    top = max(mapping, default=0)
    # layout: 2*top probe instructions, a shared trap, then one block per j
    probe_len = 2 * top
    trap = probe_len
    blocks: list[list[tuple[str, int]]] = []
    starts: list[int] = []
    pos = trap + 1
    for j in range(1, top + 1):
        starts.append(pos)
        if j in mapping:
            body = [("INC", 0)] * mapping[j] + [("HALT", 0)]
        else:
            body = [("TRAP", 0)]
        blocks.append(body)
        pos += len(body)
    end = pos
    code: list[Instruction] = []
    for j in range(1, top + 1):
        i = len(code)
        code.append(DEC(1))
        code.append(JZ(1, starts[j - 1] - (i + 1)))
    code.append(JMP(0))  # the trap: x exceeds every key, or the empty table
    for body in blocks:
        for kind, _ in body:
            i = len(code)
            if kind == "INC":
                code.append(INC(1))
            elif kind == "HALT":
                code.append(JMP(end - i))
            else:
                code.append(JMP(0))
    return Program(tuple(code)).validate()


# -- text format -------------------------------------------------------------------


def parse_program(text: str) -> Program:
    """Parse the line format ``INC r`` / ``DEC r`` / ``JZ r d`` / ``JMP d``.

    ``#`` starts a comment; ``;`` may separate instructions on one line.
    """
    out: list[Instruction] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        for chunk in line.split(";"):
            parts = chunk.split()
            if not parts:
                continue
            name = parts[0].upper()
            try:
                args = [int(a) for a in parts[1:]]
            except ValueError:
                raise ProgramSyntaxError(line_no, raw, "non-integer operand") from None
            arity = {"INC": 1, "DEC": 1, "JZ": 2, "JMP": 1}.get(name)
            if arity is None:
                raise ProgramSyntaxError(line_no, raw, f"unknown opcode {parts[0]!r}")
            if len(args) != arity:
                raise ProgramSyntaxError(line_no, raw, f"{name} takes {arity} operand(s)")
            if name == "INC":
                ins = INC(args[0])
            elif name == "DEC":
                ins = DEC(args[0])
            elif name == "JZ":
                ins = JZ(args[0], args[1])
            else:
                ins = JMP(args[0])
            try:
                _check_instruction(ins)
            except InvalidProgram as exc:
                raise ProgramSyntaxError(line_no, raw, str(exc)) from None
            out.append(ins)
    return Program(tuple(out)).validate()


def format_program(p: Program, sep: str = "\n") -> str:
    return sep.join(str(i) for i in p)


# -- numeric codes -----------------------------------------------------------------

_TAGS = (Op.INC, Op.DEC, Op.JZ, Op.JMP)


def zigzag(d: int) -> int:
    return 2 * d if d >= 0 else -2 * d - 1


def unzigzag(z: int) -> int:
    return z // 2 if z % 2 == 0 else -(z + 1) // 2


def encode_instruction(ins: Instruction) -> int:
    _check_instruction(ins)
    if ins.op in (Op.INC, Op.DEC):
        k = ins.reg
    elif ins.op == Op.JZ:
        k = cantor_pair(ins.reg, zigzag(ins.offset) + 1)
    else:
        k = zigzag(ins.offset) + 1
    return coprod_unnumber(4, _TAGS.index(ins.op) + 1, k)


def decode_instruction(n: int) -> Instruction:
    i, k = coprod_number(4, n)
    op = _TAGS[i - 1]
    if op in (Op.INC, Op.DEC):
        return Instruction(op, k, 0)
    if op == Op.JZ:
        r, z = cantor_unpair(k)
        return JZ(r, unzigzag(z - 1))
    return JMP(unzigzag(k - 1))


def encode_program(p: Program) -> int:
    """Bijective code in Z+: 1 is the empty program, else length-prefixed chain."""
    p.validate()
    codes = [encode_instruction(ins) for ins in p]
    if not codes:
        return 1
    chain = codes[-1]
    for c in reversed(codes[:-1]):
        chain = cantor_pair(c, chain)
    return cantor_pair(len(codes), chain) + 1


class Decoded(NamedTuple):
    program: Program
    canonical: bool  # False when the code names an invalid sequence


def decode_program(n: int) -> Decoded:
    """Total inverse of :func:`encode_program`.

    Codes naming an invalid instruction sequence decode to the empty program
    with ``canonical=False``.
    """
    if n < 1:
        raise ValueError("program codes are positive")
    if n == 1:
        return Decoded(EMPTY, True)
    length, chain = cantor_unpair(n - 1)
    codes = []
    for _ in range(length - 1):
        a, chain = cantor_unpair(chain)
        codes.append(a)
    codes.append(chain)
    prog = Program(tuple(decode_instruction(c) for c in codes))
    if not prog.is_valid:
        return Decoded(EMPTY, False)
    return Decoded(prog, True)


# -- enumeration -------------------------------------------------------------------


def alphabet(registers: int, max_offset: int) -> list[Instruction]:
    """Instruction alphabet in canonical enumeration order."""
    out = [INC(r) for r in range(1, registers + 1)]
    out += [DEC(r) for r in range(1, registers + 1)]
    out += [JZ(r, d) for r in range(1, registers + 1) for d in range(-max_offset, max_offset + 1)]
    out += [JMP(d) for d in range(-max_offset, max_offset + 1)]
    return out


def alphabet_hash(registers: int | None = None, max_offset: int | None = None) -> str:
    """Fingerprint of the machine semantics and code scheme (and alphabet, if given)."""
    parts = ["haltren-machine-v1", "ops=INC,DEC,JZ,JMP", "dec=saturating", "io=r1",
             "code=coprod4+cantor+zigzag;program=cantor-chain+1"]
    if registers is not None:
        parts.append(f"registers={registers};max_offset={max_offset}")
    return hashlib.sha256("|".join(parts).encode()).hexdigest()[:16]


def enumerate_programs(max_size: int, registers: int, max_offset: int) -> Iterator[Program]:
    """All valid programs of size <= ``max_size``, by size then lexicographically."""
    letters = alphabet(registers, max_offset)
    for n in range(max_size + 1):
        columns = [
            [ins for ins in letters if not ins.is_jump or 0 <= pos + ins.offset <= n]
            for pos in range(n)
        ]
        for combo in product(*columns):
            yield Program(combo)


def random_program(rng: random.Random, size: int, registers: int = 2, max_offset: int = 2) -> Program:
    letters = alphabet(registers, max_offset)
    out: list[Instruction] = []
    for pos in range(size):
        choices = [ins for ins in letters if not ins.is_jump or 0 <= pos + ins.offset <= size]
        out.append(rng.choice(choices))
    return Program(tuple(out))
