"""
Unit tests for n-bit operator semantics and the flat-program interpreter.
"""

import pytest

from app.models.program import FlatProgram, Port, PrimExpr
from app.services.errors import MissingInput, UnsupportedOp
from app.services.semantics import apply_op, decode, encode, interpret, to_signed


def test_encode_and_signed_reading():
    """Unit test: -1 is the all-ones pattern and reads back as -1 when signed."""
    assert encode(-1, 4) == 15
    assert to_signed(15, 4) == -1
    assert to_signed(7, 4) == 7
    assert decode(15, 4, signed=False) == 15
    assert decode(8, 4, signed=True) == -8


@pytest.mark.parametrize(
    "op,args,signed,expected",
    [
        ("ADD", [15, 1], False, 0),
        ("SUB", [0, 1], False, 15),
        ("MUL", [5, 5], False, 9),
        ("MUL-CONST", [3, 6], False, 2),
        ("AND", [12, 10], False, 8),
        ("OR", [12, 10], False, 14),
        ("XOR", [12, 10], False, 6),
        ("NOT", [5], False, 10),
        ("SHL-CONST", [3, 2], False, 12),
        ("SHL-CONST", [3, 4], False, 0),
        ("SHR-CONST", [8, 1], False, 4),
        ("SHR-CONST", [8, 1], True, 12),
        ("LT", [15, 1], False, 0),
        ("LT", [15, 1], True, 1),
        ("GE", [7, 7], False, 1),
        ("EQ", [3, 3], False, 1),
        ("NEQ", [3, 3], False, 0),
        ("MUX", [1, 4, 9], False, 4),
        ("MUX", [0, 4, 9], False, 9),
        ("CONST", [18], False, 2),
    ],
)
def test_apply_op_four_bits(op, args, signed, expected):
    """Unit test: operators wrap at 4 bits; signedness changes comparisons and right shifts."""
    assert apply_op(op, args, 4, signed) == expected


def test_unknown_operator():
    """Unit test: an operator outside the primitive set is rejected."""
    with pytest.raises(UnsupportedOp):
        apply_op("DIV", [4, 2], 4)


def adder() -> FlatProgram:
    return FlatProgram(
        bit_width=16,
        inputs=[Port(name="i1"), Port(name="i2")],
        outputs=[Port(name="o")],
        exprs=[
            PrimExpr(dest="val", op="ADD", args=["i1", "i2"]),
            PrimExpr(dest="o", op="MOV", args=["val"]),
        ],
    )


def test_interpret_by_name_and_by_position():
    """Unit test: inputs may be given as a map or in declared order."""
    assert interpret(adder(), {"i1": 2, "i2": 3}) == {"o": 5}
    assert interpret(adder(), [65535, 1]) == {"o": 0}


def test_interpret_encodes_negative_inputs():
    """Unit test: negative inputs are wrapped to their bit pattern."""
    assert interpret(adder(), [-1, 0]) == {"o": 65535}


def test_interpret_missing_input():
    """Unit test: a missing input raises MissingInput."""
    with pytest.raises(MissingInput):
        interpret(adder(), {"i1": 1})
    with pytest.raises(MissingInput):
        interpret(adder(), [1])
