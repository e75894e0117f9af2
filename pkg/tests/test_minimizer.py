"""
Unit tests for logic minimization: prime implicants, Petrick covers, submodule
extraction and replacement inside circuits.
"""

import itertools
import random

import pytest

from app.models.circuit import Circuit, Gate
from app.models.minimizer import PetrickExpression
from app.models.program import FlatProgram, Port, PrimExpr
from app.services.circuit import evaluate, lower, output_values, validate_circuit
from app.services.errors import EmptyChart, TooManyVariables
from app.services.minimizer import (
    extract_submodules,
    format_report,
    minimal_cover,
    minimize_with_report,
    minterms_of,
    petrick_reduce,
    quine_mccluskey,
    truth_tables,
)
from app.services.semantics import interpret

from test_circuit import P61


def brute_force_primes(truth_table):
    n = len(truth_table).bit_length() - 1
    on = {index for index, bit in enumerate(truth_table) if bit}
    implicants = [
        pattern for pattern in itertools.product((0, 1, 2), repeat=n) if minterms_of(pattern) <= on
    ]
    return {
        pattern for pattern in implicants
        if not any(other != pattern and minterms_of(pattern) < minterms_of(other) for other in implicants)
    }


def brute_force_cover_size(sums):
    labels = sorted(set().union(*sums))
    for size in range(1, len(labels) + 1):
        for chosen in itertools.combinations(labels, size):
            if all(set(chosen) & labels_of_sum for labels_of_sum in sums):
                return size
    raise AssertionError("no cover")


def redundant_circuit() -> Circuit:
    """ab + a(1 - b), which is just a."""
    return Circuit(
        bit_width=1,
        field_modulus=P61,
        input_wires=[0, 1],
        output_wires=[8],
        gates=[
            Gate(kind="ZERO", inputs=[0], outputs=[2]),
            Gate(kind="ONE", inputs=[2], outputs=[3]),
            Gate(kind="MUL", inputs=[0, 1], outputs=[4]),
            Gate(kind="MUL-CONST", inputs=[1], outputs=[5], const=P61 - 1),
            Gate(kind="ADD", inputs=[5, 3], outputs=[6]),
            Gate(kind="MUL", inputs=[0, 6], outputs=[7]),
            Gate(kind="ADD", inputs=[4, 7], outputs=[8]),
        ],
    )


def test_qm_matches_brute_force_on_all_three_variable_functions():
    """Unit test: all 256 functions of 3 variables give exactly the prime implicants."""
    for code in range(256):
        table = [(code >> row) & 1 for row in range(8)]
        primes = quine_mccluskey(table)
        assert {prime.pattern for prime in primes} == brute_force_primes(table), table
        for prime in primes:
            assert prime.covered_minterms == minterms_of(prime.pattern)


def test_qm_variable_order():
    """Unit test: variable 0 is the most significant bit of the row index."""
    (prime,) = quine_mccluskey([0, 0, 1, 1])

    assert prime.pattern == (1, 2)
    assert prime.label == "1-"
    assert prime.literal_count == 1


def test_qm_limits():
    """Unit test: more than 16 variables are refused."""
    with pytest.raises(TooManyVariables):
        quine_mccluskey([0] * (1 << 17))


def test_petrick_distributive_rule():
    """Unit test: (u + v)(u + w) reduces to u in one comparison."""
    result = petrick_reduce(PetrickExpression(sums=[frozenset({"u", "v"}), frozenset({"u", "w"})]))

    assert result.cover == ["u"]
    assert result.steps == 1
    assert result.bound == 1


def test_petrick_matches_brute_force_minimum():
    """Unit test: random charts get a cover of minimum size within M(M-1)/2 steps."""
    rng = random.Random(11)
    labels = "abcdef"
    for _ in range(200):
        sums = [
            frozenset(rng.sample(labels, rng.randint(1, 3))) for _ in range(rng.randint(1, 6))
        ]
        result = petrick_reduce(PetrickExpression(sums=sums))
        assert all(set(result.cover) & labels_of_sum for labels_of_sum in sums)
        assert len(result.cover) == brute_force_cover_size(sums)
        assert result.steps <= result.bound == len(sums) * (len(sums) - 1) // 2


def test_petrick_empty_chart():
    """Unit test: no sums, or an empty sum, cannot be covered."""
    with pytest.raises(EmptyChart):
        petrick_reduce(PetrickExpression(sums=[]))
    with pytest.raises(EmptyChart):
        petrick_reduce(PetrickExpression(sums=[frozenset({"a"}), frozenset()]))


def test_minimal_cover_of_xor_and_constants():
    """Unit test: XOR needs both minterms; constant functions need nothing to compare."""
    patterns, _, _ = minimal_cover([0, 1, 1, 0])

    assert patterns == [(0, 1), (1, 0)]
    assert minimal_cover([0, 0, 0, 0]) == ([], 0, 0)
    assert minimal_cover([1, 1, 1, 1])[0] == [(2, 2)]


def test_extract_submodule_of_redundant_circuit():
    """Unit test: the five 1-bit gates form one submodule fed by both inputs."""
    circuit = redundant_circuit()
    (sub,) = extract_submodules(circuit)

    assert sub.gates == [2, 3, 4, 5, 6]
    assert sub.boundary_inputs == [0, 1]
    assert sub.boundary_outputs == [8]
    assert sub.g == 5
    assert sub.minimizable


def test_truth_tables_of_redundant_circuit():
    """Unit test: the tabulated output only follows the first input."""
    circuit = redundant_circuit()
    table = truth_tables(circuit.gates[2:], [0, 1], [8], {2: 0, 3: 1}, P61)

    assert table.tolist() == [[0, 0, 1, 1]]


def test_redundant_circuit_is_replaced():
    """Unit test: five gates become one output binding and behaviour is kept."""
    circuit = redundant_circuit()
    minimized, report = minimize_with_report(circuit)

    validate_circuit(minimized)
    assert report.gates_before == 7
    assert report.gates_after == 3
    assert report.submodules[0].replaced
    assert report.submodules[0].minimized_gates == 1
    for a, b in itertools.product((0, 1), repeat=2):
        assert output_values(minimized, evaluate(minimized, {0: a, 1: b})) == [a]
    assert "gates 7 -> 3" in format_report(report)


def test_too_many_boundary_inputs_is_skipped():
    """Unit test: a submodule above the input limit is kept as is."""
    circuit = redundant_circuit()
    minimized, report = minimize_with_report(circuit, max_inputs=1)

    assert minimized == circuit
    assert not report.submodules[0].replaced
    assert "exceed" in report.submodules[0].skipped_reason


def test_lowered_logic_keeps_behaviour():
    """Unit test: comparisons joined by OR never grow and still agree on every input."""
    prog = FlatProgram(
        bit_width=4,
        inputs=[Port(name="a"), Port(name="b")],
        outputs=[Port(name="r")],
        exprs=[
            PrimExpr(dest="x", op="LT", args=["a", "b"]),
            PrimExpr(dest="y", op="EQ", args=["a", "b"]),
            PrimExpr(dest="z", op="OR", args=["x", "y"]),
            PrimExpr(dest="r", op="MOV", args=["z"]),
        ],
    )
    circuit = lower(prog, P61)
    minimized, report = minimize_with_report(circuit, cores=2)

    validate_circuit(minimized)
    assert report.gates_after <= report.gates_before
    for a, b in itertools.product(range(16), repeat=2):
        before = output_values(circuit, evaluate(circuit, {0: a, 1: b}))
        after = output_values(minimized, evaluate(minimized, {0: a, 1: b}))
        assert before == after == [int(a <= b)]


def test_adder_has_nothing_to_minimize(adder_circuit):
    """Unit test: a purely arithmetic circuit is returned unchanged."""
    minimized, report = minimize_with_report(adder_circuit)

    assert minimized == adder_circuit
    assert report.submodules == []
    assert report.gates_after == report.gates_before


def test_minimal_cover_size_on_all_three_variable_functions():
    """Unit test: no smaller set of prime implicants covers the on-set."""
    for code in range(1, 256):
        table = [(code >> row) & 1 for row in range(8)]
        on = {row for row, bit in enumerate(table) if bit}
        primes = [minterms_of(pattern) for pattern in brute_force_primes(table)]
        smallest = next(
            size for size in range(1, len(primes) + 1)
            if any(set().union(*chosen) >= on for chosen in itertools.combinations(primes, size))
        )
        patterns, steps, bound = minimal_cover(table)
        assert len(patterns) == smallest, table
        assert set().union(*(minterms_of(pattern) for pattern in patterns)) == on
        assert steps <= bound


def logic_program(rng: random.Random) -> FlatProgram:
    """Comparisons and is-zero tests of three 3-bit inputs, joined by Boolean operators and nested conditionals."""
    names = ["a", "b", "c"]
    exprs = [PrimExpr(dest="zero", op="CONST", args=[0])]
    flags = []
    for index in range(rng.randint(2, 3)):
        dest = f"f{index}"
        if rng.random() < 0.7:
            exprs.append(PrimExpr(dest=dest, op=rng.choice(["LT", "GT", "LE", "GE", "EQ", "NEQ"]),
                                  args=rng.sample(names, 2)))
        else:
            exprs.append(PrimExpr(dest=dest, op="EQ", args=[rng.choice(names), "zero"]))
        flags.append(dest)
    for index in range(rng.randint(2, 4)):
        dest = f"g{index}"
        op = rng.choice(["AND", "OR", "XOR", "MUX", "NOT"])
        if op == "MUX":
            exprs.append(PrimExpr(dest=dest, op="MUX", args=[rng.choice(flags) for _ in range(3)]))
        elif op == "NOT":
            exprs.append(PrimExpr(dest=dest, op="EQ", args=[rng.choice(flags), "zero"]))
        else:
            exprs.append(PrimExpr(dest=dest, op=op, args=rng.sample(flags, 2)))
        flags.append(dest)
    exprs.append(PrimExpr(dest="r", op="MOV", args=[flags[-1]]))
    return FlatProgram(
        bit_width=3,
        inputs=[Port(name=name) for name in names],
        outputs=[Port(name="r")],
        exprs=exprs,
    )


def test_generated_logic_circuits_minimize_safely():
    """Unit test: 20 generated logic circuits keep every output, never grow, and stay within the Petrick bound."""
    rng = random.Random(1461)
    submodules = 0
    for _ in range(20):
        prog = logic_program(rng)
        circuit = lower(prog, P61)
        minimized, report = minimize_with_report(circuit, max_inputs=10)

        validate_circuit(minimized)
        assert report.gates_after <= report.gates_before
        for sub in report.submodules:
            assert sub.minimized_gates <= sub.original_gates or not sub.replaced
            assert sub.petrick_steps <= sub.petrick_bound
            assert sub.boundary_inputs <= 10 or not sub.replaced
        submodules += len(report.submodules)
        for values in itertools.product(range(8), repeat=3):
            inputs = dict(zip(circuit.input_wires, values))
            before = output_values(circuit, evaluate(circuit, inputs))
            after = output_values(minimized, evaluate(minimized, inputs))
            assert before == after == [interpret(prog, list(values))["r"]], (prog.exprs, values)

    assert submodules > 0
