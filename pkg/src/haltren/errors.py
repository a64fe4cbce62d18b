"""Exception hierarchy shared by all haltren modules."""

from __future__ import annotations


class HaltrenError(Exception):
    """Base class for every error raised by this package."""


class InvalidProgram(HaltrenError):
    pass


class InvalidInput(HaltrenError):
    pass


class ProgramSyntaxError(InvalidProgram):
    def __init__(self, line_no: int, line: str, reason: str) -> None:
        super().__init__(f"line {line_no}: {reason}: {line!r}")
        self.line_no = line_no
        self.line = line


class DuplicateKey(HaltrenError):
    pass


class OutOfRange(HaltrenError):
    pass


class CertificateViolation(HaltrenError):
    pass


class EmptyCertifiedSet(HaltrenError):
    pass


class UncertifiedInput(HaltrenError):
    def __init__(self, index: int, detail: str = "") -> None:
        msg = f"halting status of input {index} is not certified"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.index = index


class UncertifiedGenerator(HaltrenError):
    def __init__(self, program, k: int) -> None:
        super().__init__(f"generator [{program}] is not certified at k={k}")
        self.program = program
        self.k = k


class OutsideCertifiedPrefix(HaltrenError):
    pass


class MalformedSeries(HaltrenError):
    pass


class InfiniteOrbitWithinWindow(HaltrenError):
    pass


class InconclusiveSeries(HaltrenError):
    def __init__(self, reason: str, diagnostics: dict | None = None) -> None:
        super().__init__(reason)
        self.reason = reason
        self.diagnostics = diagnostics or {}


class InvalidScales(HaltrenError):
    pass


class AxiomViolation(HaltrenError):
    def __init__(self, axiom: str, counterexample: object) -> None:
        super().__init__(f"cost axiom {axiom} violated: {counterexample!r}")
        self.axiom = axiom
        self.counterexample = counterexample


class CacheMismatch(HaltrenError):
    pass
