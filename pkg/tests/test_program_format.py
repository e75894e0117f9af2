"""
Unit tests for the FlatProgram text format and its structural checks.
"""

import pytest

from app.models.program import FlatProgram, Port, PrimExpr
from app.services.errors import FrontendError, ParseError
from app.services.program_format import check_program, parse_program, serialize_program


ADDER_PROGRAM = """bitwidth 16
input i1 unsigned
input i2 unsigned
output o unsigned
val = ADD(i1, i2)
o = MOV(val)
"""


def test_parse_adder_program():
    """Unit test: header, ports and expressions are read back."""
    prog = parse_program(ADDER_PROGRAM)

    assert prog.bit_width == 16
    assert [port.name for port in prog.inputs] == ["i1", "i2"]
    assert prog.exprs[0] == PrimExpr(dest="val", op="ADD", args=["i1", "i2"])
    assert serialize_program(prog) == ADDER_PROGRAM


def test_literals_and_signed_suffix():
    """Unit test: literal operands become ints and ` signed` sets the flag."""
    text = "bitwidth 8\ninput a signed\noutput r unsigned\nb = SHR-CONST(a, 2) signed\nc = MUL-CONST(b, 3)\nr = MOV(c)\n"
    prog = parse_program(text)

    assert prog.exprs[0].args == ["a", 2]
    assert prog.exprs[0].signed is True
    assert prog.exprs[1].args == ["b", 3]
    assert prog.inputs[0].signed is True


@pytest.mark.parametrize(
    "text,line",
    [
        ("input a unsigned\n", 1),
        ("bitwidth x\n", 1),
        ("bitwidth 8\ninput a maybe\n", 2),
        ("bitwidth 8\ninput a unsigned\nb = FOO(a, a)\n", 3),
        ("bitwidth 8\ninput a unsigned\nb = MUL-CONST(a, a)\n", 3),
        ("bitwidth 8\ninput a unsigned\nthis is not an expression\n", 3),
    ],
)
def test_parse_errors_carry_line(text, line):
    """Unit test: malformed lines raise ParseError with the offending line number."""
    with pytest.raises(ParseError) as info:
        parse_program(text, path="p.txt")

    assert info.value.line == line
    assert info.value.path == "p.txt"


def test_single_assignment_is_enforced():
    """Unit test: writing the same destination twice is rejected."""
    prog = FlatProgram(
        bit_width=8,
        inputs=[Port(name="a")],
        outputs=[Port(name="b")],
        exprs=[PrimExpr(dest="b", op="MOV", args=["a"]), PrimExpr(dest="b", op="MOV", args=["a"])],
    )
    with pytest.raises(FrontendError):
        check_program(prog)


def test_use_before_assignment_and_unwritten_output():
    """Unit test: topological order and output coverage are checked."""
    forward = FlatProgram(
        bit_width=8, inputs=[Port(name="a")], outputs=[Port(name="c")],
        exprs=[PrimExpr(dest="c", op="ADD", args=["a", "b"]), PrimExpr(dest="b", op="MOV", args=["a"])],
    )
    unwritten = FlatProgram(bit_width=8, inputs=[Port(name="a")], outputs=[Port(name="z")], exprs=[])

    with pytest.raises(FrontendError):
        check_program(forward)
    with pytest.raises(FrontendError):
        check_program(unwritten)
