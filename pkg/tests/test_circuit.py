"""
Unit tests for circuit construction: gadgets checked exhaustively at 4 bits
against the flat-program semantics, widths, the constant law, evaluation and
structural validation.
"""

import itertools

import pytest

from app.models.circuit import Assignment, Circuit, Gate
from app.models.program import FlatProgram, Port, PrimExpr
from app.services.circuit import (
    CircuitBuilder,
    check_assignment,
    constant_gate_count,
    evaluate,
    gate_widths,
    lower,
    output_values,
    validate_circuit,
    wire_widths,
)
from app.services.errors import (
    CircuitError,
    FieldTooSmall,
    InconsistentAssignment,
    MissingInput,
    NoInputWire,
    ValueOutOfRange,
    WidthMismatch,
)
from app.services.semantics import interpret

P61 = 2**61 - 1


def single(op, args, signed=False, names=("a", "b"), bit_width=4) -> FlatProgram:
    return FlatProgram(
        bit_width=bit_width,
        inputs=[Port(name=name, signed=signed) for name in names],
        outputs=[Port(name="r", signed=signed)],
        exprs=[PrimExpr(dest="t", op=op, args=list(args), signed=signed), PrimExpr(dest="r", op="MOV", args=["t"])],
    )


def agrees(prog: FlatProgram) -> None:
    circuit = lower(prog, P61)
    validate_circuit(circuit)
    for values in itertools.product(range(1 << prog.bit_width), repeat=len(prog.inputs)):
        assignment = evaluate(circuit, dict(zip(circuit.input_wires, values)))
        expected = interpret(prog, list(values))
        assert output_values(circuit, assignment) == [expected["r"]], (prog.exprs[0], values)


@pytest.mark.parametrize("op", ["ADD", "SUB", "MUL", "AND", "OR", "XOR", "EQ", "NEQ"])
def test_binary_gadgets_match_semantics(op):
    """Unit test: every 4-bit operand pair gives the interpreter's result."""
    agrees(single(op, ["a", "b"]))


@pytest.mark.parametrize("op", ["LT", "GT", "LE", "GE"])
@pytest.mark.parametrize("signed", [False, True])
def test_comparisons_match_semantics(op, signed):
    """Unit test: widened-difference comparisons, unsigned and two's complement."""
    agrees(single(op, ["a", "b"], signed=signed))


@pytest.mark.parametrize("k", [0, 1, 3, 4])
def test_shifts_match_semantics(k):
    """Unit test: shifts by constants, arithmetic right shift included."""
    agrees(single("SHL-CONST", ["a", k], names=("a",)))
    agrees(single("SHR-CONST", ["a", k], names=("a",)))
    agrees(single("SHR-CONST", ["a", k], signed=True, names=("a",)))


@pytest.mark.parametrize("c", [0, 1, 3, 15])
def test_mul_const_matches_semantics(c):
    """Unit test: multiplication by a literal wraps at n bits."""
    agrees(single("MUL-CONST", ["a", c], names=("a",)))


def test_not_and_mux_match_semantics():
    """Unit test: bitwise NOT and the n-bit multiplexer."""
    agrees(single("NOT", ["a"], names=("a",)))
    agrees(single("MUX", ["c", "a", "b"], names=("c", "a", "b")))


def test_adder_circuit():
    """Unit test: the adder contract lowers to one data-path ADD plus the truncation."""
    prog = FlatProgram(
        bit_width=16,
        inputs=[Port(name="i1"), Port(name="i2")],
        outputs=[Port(name="o")],
        exprs=[PrimExpr(dest="val", op="ADD", args=["i1", "i2"]), PrimExpr(dest="o", op="MOV", args=["val"])],
    )
    circuit = lower(prog, P61)

    assert [gate.kind for gate in circuit.gates] == ["ZERO", "ONE", "ADD", "EXPAND", "COMPRESS"]
    assert output_values(circuit, evaluate(circuit, {0: 2, 1: 3})) == [5]
    assert output_values(circuit, evaluate(circuit, {0: 65535, 1: 1})) == [0]


@pytest.mark.parametrize("constants", [[], [5], [5, 7, 13], [2, 3, 4, 5, 6, 7, 8, 9]])
def test_constant_law(constants):
    """Unit test: k extra constants cost exactly k + 2 gates."""
    exprs = [PrimExpr(dest=f"c{value}", op="CONST", args=[value]) for value in constants]
    acc = "a"
    for index, value in enumerate(constants):
        exprs.append(PrimExpr(dest=f"s{index}", op="ADD", args=[acc, f"c{value}"]))
        acc = f"s{index}"
    exprs.append(PrimExpr(dest="r", op="MOV", args=[acc]))
    prog = FlatProgram(bit_width=8, inputs=[Port(name="a")], outputs=[Port(name="r")], exprs=exprs)

    circuit = lower(prog, P61)

    assert constant_gate_count(circuit) == len(constants) + 2
    expected = (3 + sum(constants)) % 256
    assert output_values(circuit, evaluate(circuit, {0: 3})) == [expected]


def test_negate_uses_all_ones_constant():
    """Unit test: negation at 4 bits multiplies by 15; -3 is 13."""
    builder = CircuitBuilder(4, P61)
    a = builder.input()
    builder.emit_constants([])
    builder.bind_output(builder.emit_negate(a))
    circuit = builder.build()

    assert any(gate.kind == "MUL-CONST" and gate.const == 15 for gate in circuit.gates)
    assert output_values(circuit, evaluate(circuit, {a: 3})) == [13]
    assert output_values(circuit, evaluate(circuit, {a: 0})) == [0]


def test_bind_output_copies_inputs_and_repeats():
    """Unit test: an input or an already bound wire gets a fresh ADD-zero wire."""
    builder = CircuitBuilder(4, P61)
    a = builder.input()
    builder.emit_constants([])
    first = builder.bind_output(a)
    second = builder.bind_output(first)
    circuit = builder.build()

    assert len({a, first, second}) == 3
    validate_circuit(circuit)
    assert output_values(circuit, evaluate(circuit, {a: 9})) == [9, 9]


def test_gate_widths():
    """Unit test: Boolean closure, ADD max+1, MUL sum and MUL-CONST by bit length."""
    widths = {0: 8, 1: 8, 2: 1, 3: 1}

    assert gate_widths(Gate(kind="ADD", inputs=[0, 1], outputs=[9]), widths, P61) == [9]
    assert gate_widths(Gate(kind="MUL", inputs=[0, 1], outputs=[9]), widths, P61) == [16]
    assert gate_widths(Gate(kind="ADD", inputs=[2, 3], outputs=[9]), widths, P61) == [1]
    assert gate_widths(Gate(kind="MUL-CONST", inputs=[2], outputs=[9], const=P61 - 1), widths, P61) == [1]
    assert gate_widths(Gate(kind="MUL-CONST", inputs=[2], outputs=[9], const=5), widths, P61) == [3]
    assert gate_widths(Gate(kind="MUL-CONST", inputs=[0], outputs=[9], const=5), widths, P61) == [11]
    assert gate_widths(Gate(kind="COMPRESS", inputs=[2, 3, 2], outputs=[9]), widths, P61) == [3]


def test_field_too_small():
    """Unit test: 2^(2n) must stay below p."""
    with pytest.raises(FieldTooSmall):
        CircuitBuilder(16, 65521)


def test_constants_need_an_input():
    """Unit test: without an input wire there is nothing to derive zero from."""
    with pytest.raises(NoInputWire):
        CircuitBuilder(4, P61).emit_constants([3])


def test_evaluate_rejects_missing_and_out_of_range_inputs():
    """Unit test: every input needs a value below 2^n."""
    circuit = lower(single("ADD", ["a", "b"]), P61)

    with pytest.raises(MissingInput):
        evaluate(circuit, {0: 1})
    with pytest.raises(ValueOutOfRange):
        evaluate(circuit, {0: 1, 1: 16})


def test_check_assignment_detects_tampering():
    """Unit test: a changed internal value breaks gate consistency."""
    circuit = lower(single("MUL", ["a", "b"]), P61)
    assignment = evaluate(circuit, {0: 3, 1: 5})
    check_assignment(circuit, assignment)

    mul_out = next(gate.outputs[0] for gate in circuit.gates if gate.kind == "MUL")
    values = dict(assignment.values)
    values[mul_out] += 1
    with pytest.raises(InconsistentAssignment):
        check_assignment(circuit, Assignment(values=values))

    del values[mul_out]
    with pytest.raises(InconsistentAssignment):
        check_assignment(circuit, Assignment(values=values))


def base_circuit(gates, outputs=(3,)):
    return Circuit(bit_width=4, field_modulus=P61, gates=gates, input_wires=[0, 1], output_wires=list(outputs))


def test_validate_structure_errors():
    """Unit test: use before definition, double writes, sparse ids and bad outputs."""
    with pytest.raises(CircuitError):
        validate_circuit(base_circuit([Gate(kind="ADD", inputs=[0, 5], outputs=[2])], outputs=(2,)))
    with pytest.raises(CircuitError):
        validate_circuit(base_circuit([Gate(kind="ADD", inputs=[0, 1], outputs=[1])], outputs=(1,)))
    with pytest.raises(CircuitError):
        validate_circuit(base_circuit([Gate(kind="ADD", inputs=[0, 1], outputs=[7])], outputs=(7,)))
    with pytest.raises(CircuitError):
        validate_circuit(base_circuit([Gate(kind="ADD", inputs=[0, 1], outputs=[2])], outputs=(0,)))
    with pytest.raises(CircuitError):
        validate_circuit(base_circuit([Gate(kind="ADD", inputs=[0], outputs=[2])], outputs=(2,)))


def test_validate_width_errors():
    """Unit test: EXPAND beyond the source width and COMPRESS of wide wires."""
    with pytest.raises(WidthMismatch):
        validate_circuit(base_circuit([Gate(kind="EXPAND", inputs=[0], outputs=[2], bits=[4])], outputs=(2,)))
    with pytest.raises(WidthMismatch):
        validate_circuit(base_circuit([Gate(kind="COMPRESS", inputs=[0, 1], outputs=[2])], outputs=(2,)))


def test_wire_widths_of_lowered_comparison():
    """Unit test: comparison outputs are single bits."""
    circuit = lower(single("LT", ["a", "b"]), P61)

    assert wire_widths(circuit)[circuit.output_wires[0]] == 1
