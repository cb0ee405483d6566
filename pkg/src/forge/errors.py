"""Exception hierarchy shared by every module."""

from __future__ import annotations


class ForgeError(Exception):
    """Base class for all errors raised by forge."""


class DomainError(ForgeError, ValueError):
    """An argument lies outside the admissible domain of an operation."""


class OutOfRangeError(ForgeError, IndexError):
    """A query exceeds what a precomputed table covers."""


class SampleSizeError(DomainError):
    pass


class SpanError(DomainError):
    pass


class CollatzOverflowError(ForgeError, OverflowError):
    """An iterate left the 128-bit working width."""

    def __init__(self, value: int, seed: int | None = None):
        self.value = value
        self.seed = seed
        where = f" (seed {seed})" if seed is not None else ""
        super().__init__(f"3n+1 overflows 128 bits at n={value}{where}")


class BudgetExhaustedError(ForgeError):
    """A Collatz trajectory did not reach its target within the step budget."""

    def __init__(self, seed: int, budget: int):
        self.seed = seed
        self.budget = budget
        super().__init__(f"seed {seed} exhausted the step budget of {budget}")


class CounterexampleFound(ForgeError):
    """A conjecture check produced a witness that must be reported, never swallowed."""

    def __init__(self, conjecture: str, witness, detail: str = ""):
        self.conjecture = conjecture
        self.witness = witness
        self.detail = detail
        msg = f"{conjecture}: counterexample candidate {witness}"
        super().__init__(f"{msg} ({detail})" if detail else msg)


class IntegrityError(ForgeError):
    """A re-verified chunk did not reproduce its recorded digest."""

    def __init__(self, chunk: tuple[int, int], expected: str, got: str):
        self.chunk = chunk
        self.expected = expected
        self.got = got
        super().__init__(f"digest mismatch on chunk {list(chunk)}: recorded {expected}, recomputed {got}")


class CheckpointParseError(ForgeError):
    def __init__(self, path, lineno: int, reason: str):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {reason}")
