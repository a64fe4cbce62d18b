"""Halting regularization on a desk-scale register machine.

Budgeted evaluation with exact divergence proofs, complexity-based
numberings, time cut-offs, generating-series regularization and Hopf-algebra
renormalization of halting characters.
"""

from ._backend import BACKEND
from .errors import HaltrenError
from .machine import (
    DEC,
    EMPTY,
    INC,
    JMP,
    JZ,
    CostTriple,
    Halted,
    Program,
    ProvenDivergent,
    Unknown,
    parse_program,
    run,
)

__all__ = [
    "BACKEND",
    "DEC",
    "EMPTY",
    "INC",
    "JMP",
    "JZ",
    "CostTriple",
    "Halted",
    "HaltrenError",
    "Program",
    "ProvenDivergent",
    "Unknown",
    "parse_program",
    "run",
]

__version__ = "0.1.0"
