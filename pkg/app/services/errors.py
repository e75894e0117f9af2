"""
Exception hierarchy for the toolkit.

Every stage raises a subclass of ToolkitError so the command-line layer can
tell user mistakes (bad source, bad config) apart from internal failures.
"""

from __future__ import annotations

from typing import Optional


class ToolkitError(Exception):
    """Base class of every error raised by the toolkit."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        super().__init__(message)
        self.message = message
        self.path = path
        self.line = line

    def __str__(self) -> str:
        if self.line is not None:
            return f"{self.path or '<input>'}:{self.line}: {self.message}"
        if self.path is not None:
            return f"{self.path}: {self.message}"
        return self.message


class ConfigError(ToolkitError):
    """Invalid pipeline configuration."""


# (1) Frontend
class FrontendError(ToolkitError):
    """Base class for contract compilation errors."""


class UnresolvedInclude(FrontendError):
    pass


class UnbalancedConditional(FrontendError):
    pass


class RecursiveMacro(FrontendError):
    pass


class DuplicateSymbol(FrontendError):
    pass


class MissingEntryPoint(FrontendError):
    pass


class EntrySignatureMismatch(FrontendError):
    pass


class DynamicIndex(FrontendError):
    pass


class UnboundedLoop(FrontendError):
    pass


class UnsupportedConstruct(FrontendError):
    pass


class UndefinedSymbol(FrontendError):
    pass


# (2) Circuit
class CircuitError(ToolkitError):
    """Base class for circuit construction and evaluation errors."""


class FieldTooSmall(CircuitError):
    pass


class UnsupportedOp(CircuitError):
    pass


class WidthMismatch(CircuitError):
    pass


class NoInputWire(CircuitError):
    pass


class MissingInput(CircuitError):
    pass


class ValueOutOfRange(CircuitError):
    pass


class ParseError(ToolkitError):
    """Malformed text artifact; carries the offending line number."""


# (3) Minimizer
class MinimizerError(ToolkitError):
    pass


class TooManyVariables(MinimizerError):
    pass


class EmptyChart(MinimizerError):
    pass


# (4) QAP
class QAPError(ToolkitError):
    pass


class DuplicateAbscissa(QAPError):
    pass


class NoMultiplicationGates(QAPError):
    pass


class InconsistentAssignment(QAPError):
    pass


class DimensionMismatch(QAPError):
    pass


class NotDivisible(QAPError):
    """p(x) is not a multiple of t(x); the witness is invalid."""

    def __init__(self, remainder, message: str = "p(x) is not divisible by t(x)"):
        super().__init__(message)
        self.remainder = remainder


# (5) Crypto
class CryptoError(ToolkitError):
    pass


class InvalidWitness(CryptoError):
    pass


class MalformedProof(CryptoError):
    pass


class NotPrime(CryptoError):
    pass


# (6) Chain
class ChainError(ToolkitError):
    pass


class ScriptTooLarge(ChainError):
    pass


class PushTooLarge(ChainError):
    pass


class StackUnderflow(ChainError):
    pass


class HashMismatch(ChainError):
    pass


class DeserializeError(ChainError):
    pass


class LedgerError(ChainError):
    pass
