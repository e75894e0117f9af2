"""
n-bit two's-complement semantics of the flat-program operators and the
reference interpreter for FlatProgram.

Values are bit patterns in [0, 2^n); signedness only changes how LT/GT/LE/GE
and SHR-CONST read them.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Mapping, Sequence, Union

from app.models.program import FlatProgram
from app.services.errors import MissingInput, UnsupportedOp, ValueOutOfRange


COMPARISONS = ("LT", "GT", "LE", "GE", "EQ", "NEQ")


def mask(bit_width: int) -> int:
    return (1 << bit_width) - 1


def to_signed(value: int, bit_width: int) -> int:
    """Read an n-bit pattern as a two's-complement integer."""
    value &= mask(bit_width)
    if value >> (bit_width - 1):
        return value - (1 << bit_width)
    return value


def encode(value: int, bit_width: int) -> int:
    """Wrap any integer (negative ones included) to its n-bit pattern."""
    return value & mask(bit_width)


def decode(value: int, bit_width: int, signed: bool) -> int:
    return to_signed(value, bit_width) if signed else value & mask(bit_width)


def io_patterns(values: Sequence[int], bit_width: int, signed_positions: Iterable[int]) -> List[int]:
    """
    User-facing IO values as n-bit patterns.

    Negative values are only accepted at signed positions and are stored in
    two's complement; prover and verifier both go through here.
    """
    signed = set(signed_positions)
    patterns = []
    for position, value in enumerate(values):
        if value > mask(bit_width) or value < -(1 << (bit_width - 1)):
            raise ValueOutOfRange(f"value {value} at IO position {position} does not fit {bit_width} bits")
        if value < 0:
            if position not in signed:
                raise ValueOutOfRange(f"value {value} at IO position {position} is negative but unsigned")
            value = encode(value, bit_width)
        patterns.append(value)
    return patterns


def apply_op(op: str, args: Sequence[int], bit_width: int, signed: bool = False) -> int:
    """Evaluate one primitive operator on n-bit patterns."""
    m = mask(bit_width)
    if op == "ADD":
        return (args[0] + args[1]) & m
    if op == "SUB":
        return (args[0] - args[1]) & m
    if op in ("MUL", "MUL-CONST"):
        return (args[0] * args[1]) & m
    if op == "AND":
        return args[0] & args[1]
    if op == "OR":
        return args[0] | args[1]
    if op == "XOR":
        return args[0] ^ args[1]
    if op == "NOT":
        return ~args[0] & m
    if op == "SHL-CONST":
        return (args[0] << args[1]) & m if args[1] < bit_width else 0
    if op == "SHR-CONST":
        if signed:
            return (to_signed(args[0], bit_width) >> args[1]) & m
        return args[0] >> args[1]
    if op in COMPARISONS:
        a, b = args
        if signed:
            a, b = to_signed(a, bit_width), to_signed(b, bit_width)
        return int({
            "LT": a < b,
            "GT": a > b,
            "LE": a <= b,
            "GE": a >= b,
            "EQ": a == b,
            "NEQ": a != b,
        }[op])
    if op == "MUX":
        return args[1] if args[0] else args[2]
    if op == "CONST":
        return args[0] & m
    if op == "MOV":
        return args[0]
    raise UnsupportedOp(f"unknown operator {op}")


def interpret(prog: FlatProgram, inputs: Union[Mapping[str, int], Sequence[int]]) -> Dict[str, int]:
    """
    Execute a flat program.

    `inputs` is either a name -> value map or a list in declared input order;
    values may be negative for signed inputs. Returns output patterns by name.
    """
    if not isinstance(inputs, Mapping):
        if len(inputs) != len(prog.inputs):
            raise MissingInput(f"expected {len(prog.inputs)} input values, got {len(inputs)}")
        inputs = {port.name: value for port, value in zip(prog.inputs, inputs)}

    env: Dict[str, int] = {}
    for port in prog.inputs:
        if port.name not in inputs:
            raise MissingInput(f"missing input '{port.name}'")
        env[port.name] = encode(inputs[port.name], prog.bit_width)

    for expr in prog.exprs:
        values: List[int] = []
        for position, arg in enumerate(expr.args):
            if is_literal(expr.op, position):
                values.append(int(arg))
            else:
                values.append(env[arg])
        env[expr.dest] = apply_op(expr.op, values, prog.bit_width, expr.signed)

    return {port.name: env[port.name] for port in prog.outputs}


def is_literal(op: str, position: int) -> bool:
    if op == "CONST":
        return True
    return op in ("MUL-CONST", "SHL-CONST", "SHR-CONST") and position == 1
