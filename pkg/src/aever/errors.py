"""Exception taxonomy shared across the package."""

from __future__ import annotations


class AeverError(Exception):
    """Base class for all package errors."""


class UnboundVariable(AeverError):
    def __init__(self, name: str):
        super().__init__(f"unbound variable: {name}")
        self.name = name


class UnknownFunction(AeverError):
    def __init__(self, name: str):
        super().__init__(f"unknown function: {name}")
        self.name = name


class ArityMismatch(AeverError):
    def __init__(self, fname: str, expected: int, got: int):
        super().__init__(f"call to {fname} with {got} argument(s), expected {expected}")
        self.fname = fname
        self.expected = expected
        self.got = got


class SortMismatch(AeverError):
    pass


class AlreadyIndexed(AeverError):
    def __init__(self, name: str):
        super().__init__(f"variable already carries a copy index: {name}")
        self.name = name


class MissingSpec(AeverError):
    def __init__(self, fname: str, side: str):
        super().__init__(f"no {side} specification for function {fname}")
        self.fname = fname
        self.side = side


class MissingUniversalSpec(MissingSpec):
    def __init__(self, fname: str):
        super().__init__(fname, "universal")


class MissingExistentialSpec(MissingSpec):
    def __init__(self, fname: str):
        super().__init__(fname, "existential")


class EmptyPostcondition(AeverError):
    """An existential call admits no return value inside the enumeration
    domain although its precondition held: the spec instantiation is
    unrealizable at this domain."""

    def __init__(self, fname: str, choices: tuple):
        super().__init__(
            f"existential spec of {fname} has an empty postcondition at choices {choices}"
        )
        self.fname = fname
        self.choices = choices


class MissingInvariant(AeverError):
    pass


class MissingVariant(AeverError):
    pass


class AllEmpty(AeverError):
    """Every program copy has been fully consumed."""


class SolverSpawnError(AeverError):
    pass


class ProtocolError(AeverError):
    def __init__(self, message: str, raw: str = ""):
        super().__init__(message if not raw else f"{message}\n--- solver output ---\n{raw}")
        self.raw = raw


class PipelineError(AeverError):
    """An error from a named verification stage, wrapping its cause."""

    def __init__(self, stage: str, cause: AeverError):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


class ParseError(AeverError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        pos = "" if line is None else f" at line {line}" + ("" if col is None else f", column {col}")
        super().__init__(message + pos)
        self.line = line
        self.col = col
