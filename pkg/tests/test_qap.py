"""
Unit tests for QAP construction, witnesses and divisibility.
"""

import itertools
import random

import pytest

from app.models.circuit import Circuit, Gate
from app.models.qap import WitnessVector
from app.services import field
from app.services.circuit import evaluate, lower
from app.services.errors import DimensionMismatch, NoMultiplicationGates, NotDivisible, ParseError
from app.services.qap import build_qap, compute_p, divide_by_t, parse_qap, serialize_qap, witness

from test_circuit import P61, single


def honest(circuit, inputs):
    qap = build_qap(circuit)
    return qap, witness(circuit, evaluate(circuit, inputs), qap)


def test_adder_qap_shape(adder_circuit):
    """Unit test: IO variables come first, then the unit variable; t vanishes on the roots."""
    qap = build_qap(adder_circuit)

    assert (qap.n_in, qap.n_out) == (2, 1)
    assert qap.wire_index[0] == 0 and qap.wire_index[1] == 1
    assert qap.wire_index[adder_circuit.output_wires[0]] == 2
    assert qap.unit_index == 3
    assert qap.roots == list(range(1, qap.d + 1))
    assert qap.t.degree == qap.d
    assert all(field.evaluate(qap.t, root) == 0 for root in qap.roots)
    assert len(qap.v) == len(qap.w) == len(qap.y) == qap.k


def test_honest_witness_divides(adder_circuit):
    """Unit test: t(x) divides p(x) for an honest execution, overflow included."""
    for inputs in ({0: 2, 1: 3}, {0: 65535, 1: 1}, {0: 0, 1: 0}):
        qap, a = honest(adder_circuit, inputs)
        h = divide_by_t(compute_p(qap, a), qap.t)
        assert h.degree <= qap.d - 2


def test_witness_layout(adder_circuit):
    """Unit test: the witness holds the IO values, a one, then internal values."""
    qap, a = honest(adder_circuit, {0: 2, 1: 3})

    assert a.a[:4] == [2, 3, 5, 1]
    assert len(a.a) == qap.k


@pytest.mark.parametrize("op", ["MUL", "LT", "XOR", "EQ"])
def test_gadget_witnesses_divide(op):
    """Unit test: every operand pair of small gadgets yields a divisible p(x)."""
    circuit = lower(single(op, ["a", "b"]), P61)
    qap = build_qap(circuit)
    for a_value in range(0, 16, 5):
        for b_value in range(0, 16, 3):
            a = witness(circuit, evaluate(circuit, {0: a_value, 1: b_value}), qap)
            divide_by_t(compute_p(qap, a), qap.t)


def test_perturbed_witness_is_not_divisible(adder_circuit):
    """Unit test: claiming a different output breaks divisibility."""
    qap, a = honest(adder_circuit, {0: 2, 1: 3})
    a.a[2] += 1

    with pytest.raises(NotDivisible):
        divide_by_t(compute_p(qap, a), qap.t)


def test_perturbed_internal_value_is_not_divisible():
    """Unit test: a wrong product value is caught by its constraint."""
    circuit = lower(single("MUL", ["a", "b"]), P61)
    qap, a = honest(circuit, {0: 3, 1: 5})
    mul_out = next(gate.outputs[0] for gate in circuit.gates if gate.kind == "MUL")
    a.a[qap.wire_index[mul_out]] += 1

    with pytest.raises(NotDivisible):
        divide_by_t(compute_p(qap, a), qap.t)


def test_no_constraints():
    """Unit test: a circuit without multiplications, expansions or outputs has no QAP."""
    circuit = Circuit(
        bit_width=4, field_modulus=P61, input_wires=[0], output_wires=[],
        gates=[Gate(kind="ZERO", inputs=[0], outputs=[1])],
    )

    with pytest.raises(NoMultiplicationGates):
        build_qap(circuit)


def test_dimension_mismatch(adder_circuit):
    """Unit test: the witness length must equal the number of variables."""
    qap = build_qap(adder_circuit)

    with pytest.raises(DimensionMismatch):
        compute_p(qap, WitnessVector(a=[1, 2]))


def test_text_form(adder_circuit):
    """Unit test: the text form keeps every polynomial and index."""
    qap = build_qap(adder_circuit)

    assert parse_qap(serialize_qap(qap)) == qap


def test_text_form_errors(adder_circuit):
    """Unit test: unknown lines and missing headers are ParseErrors."""
    text = serialize_qap(build_qap(adder_circuit))

    with pytest.raises(ParseError):
        parse_qap(text + "bogus 1 2\n")
    with pytest.raises(ParseError):
        parse_qap("\n".join(line for line in text.splitlines() if not line.startswith("field")))


def test_every_single_coordinate_perturbation_fails(adder_circuit):
    """Unit test: changing any one witness entry breaks divisibility."""
    qap, honest_a = honest(adder_circuit, {0: 1234, 1: 4321})
    for index in range(qap.k):
        for delta in (1, P61 - 1, 12345):
            a = WitnessVector(a=list(honest_a.a))
            a.a[index] = (a.a[index] + delta) % P61
            with pytest.raises(NotDivisible):
                divide_by_t(compute_p(qap, a), qap.t)


DIVISIBILITY_CIRCUITS = [
    single("ADD", ["a", "b"]),
    single("SUB", ["a", "b"]),
    single("MUL", ["a", "b"]),
    single("AND", ["a", "b"]),
    single("OR", ["a", "b"]),
    single("XOR", ["a", "b"]),
    single("EQ", ["a", "b"]),
    single("NEQ", ["a", "b"]),
    single("LT", ["a", "b"]),
    single("GE", ["a", "b"], signed=True),
    single("SHR-CONST", ["a", 1], names=("a",)),
    single("MUL-CONST", ["a", 3], names=("a",)),
]


@pytest.mark.parametrize("prog", DIVISIBILITY_CIRCUITS, ids=lambda prog: prog.exprs[0].op)
def test_divisibility_dichotomy_on_gadgets(prog):
    """Unit test: every honest witness divides; 1000 random one-coordinate changes never do."""
    circuit = lower(prog, P61)
    qap = build_qap(circuit)
    for values in itertools.product(range(16), repeat=len(circuit.input_wires)):
        a = witness(circuit, evaluate(circuit, dict(zip(circuit.input_wires, values))), qap)
        divide_by_t(compute_p(qap, a), qap.t)

    # non-zero, distinct operands so every variable meets a non-zero partner
    honest_a = witness(circuit, evaluate(circuit, dict(zip(circuit.input_wires, [5, 3]))), qap)
    rng = random.Random(qap.k)
    for _ in range(1000):
        a = WitnessVector(a=list(honest_a.a))
        index = rng.randrange(qap.k)
        a.a[index] = (a.a[index] + rng.randrange(1, P61)) % P61
        with pytest.raises(NotDivisible):
            divide_by_t(compute_p(qap, a), qap.t)
