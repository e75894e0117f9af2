"""
Arithmetic circuits: gadget construction, lowering of flat programs,
evaluation (witness generation) and structural validation.

Gate semantics over GF(p):
    ZERO [a] TO [z]          z = a * 0
    ONE [z] TO [o]           o = z + 1
    ADD [a b] TO [c]         c = a + b
    MUL [a b] TO [c]         c = a * b
    MUL-CONST [a] BY k TO [b]
    EXPAND [a] TO [i -> b]   b = bit i of a
    COMPRESS [b0 b1 ..] TO [w]   w = sum b_j * 2^j
"""

from __future__ import annotations

import logging
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set

from app.models.circuit import Assignment, Circuit, Gate
from app.models.program import FlatProgram
from app.services.errors import (
    CircuitError,
    FieldTooSmall,
    InconsistentAssignment,
    MissingInput,
    NoInputWire,
    UnsupportedOp,
    ValueOutOfRange,
    WidthMismatch,
)


logger = logging.getLogger(__name__)


def check_field(bit_width: int, field_modulus: int) -> None:
    if 2 ** (2 * bit_width) >= field_modulus:
        raise FieldTooSmall(
            f"field modulus {field_modulus} cannot hold products of {bit_width}-bit values (need 2^{2 * bit_width} < p)"
        )


def gate_widths(gate: Gate, widths: Mapping[int, int], field_modulus: int) -> List[int]:
    """
    Bit widths of a gate's outputs.

    Gates whose inputs are all 1-bit stay in the Boolean domain (width 1);
    gadget intermediates there may carry small field values.
    """
    if gate.kind in ("ZERO", "ONE", "EXPAND"):
        return [1] * len(gate.outputs)
    if gate.kind == "COMPRESS":
        return [len(gate.inputs)]
    in_widths = [widths[w] for w in gate.inputs]
    if gate.kind == "MUL-CONST":
        width, c = in_widths[0], gate.const % field_modulus
        if width == 1:
            if c in (0, 1, field_modulus - 1, field_modulus - 2):
                return [1]
            return [c.bit_length()]
        return [width + c.bit_length()]
    if all(width == 1 for width in in_widths):
        return [1]
    if gate.kind == "ADD":
        return [max(in_widths) + 1]
    return [sum(in_widths)]


def wire_widths(circuit: Circuit) -> Dict[int, int]:
    """Derive the width of every wire from the gate list."""
    widths = {wire: circuit.bit_width for wire in circuit.input_wires}
    for gate in circuit.gates:
        for wire, width in zip(gate.outputs, gate_widths(gate, widths, circuit.field_modulus)):
            widths[wire] = width
    return widths


def validate_circuit(circuit: Circuit) -> Dict[int, int]:
    """Check structure and return the derived wire widths."""
    check_field(circuit.bit_width, circuit.field_modulus)
    defined: Set[int] = set()
    for wire in circuit.input_wires:
        if wire in defined:
            raise CircuitError(f"input wire {wire} declared twice")
        defined.add(wire)
    widths = {wire: circuit.bit_width for wire in circuit.input_wires}
    for index, gate in enumerate(circuit.gates):
        arity = {"ADD": 2, "MUL": 2, "MUL-CONST": 1, "ZERO": 1, "ONE": 1, "EXPAND": 1}.get(gate.kind)
        if arity is not None and len(gate.inputs) != arity:
            raise CircuitError(f"gate {index} ({gate.kind}) takes {arity} inputs, has {len(gate.inputs)}")
        if gate.kind == "COMPRESS" and not gate.inputs:
            raise CircuitError(f"gate {index} (COMPRESS) has no inputs")
        if gate.kind != "EXPAND" and len(gate.outputs) != 1:
            raise CircuitError(f"gate {index} ({gate.kind}) must have exactly one output")
        if gate.kind == "MUL-CONST" and gate.const is None:
            raise CircuitError(f"gate {index} (MUL-CONST) has no constant")
        for wire in gate.inputs:
            if wire not in defined:
                raise CircuitError(f"gate {index} reads wire {wire} before it is written")
        if gate.kind == "EXPAND":
            source_width = widths[gate.inputs[0]]
            if not gate.outputs or len(gate.bits) != len(gate.outputs) or len(set(gate.bits)) != len(gate.bits):
                raise CircuitError(f"gate {index} (EXPAND) needs one distinct bit position per output")
            if len(gate.outputs) > source_width or any(not 0 <= bit < source_width for bit in gate.bits):
                raise WidthMismatch(f"gate {index} expands bits {gate.bits} of a {source_width}-bit wire")
        if gate.kind == "COMPRESS" and any(widths[wire] != 1 for wire in gate.inputs):
            raise WidthMismatch(f"gate {index} (COMPRESS) takes 1-bit wires only")
        for wire in gate.outputs:
            if wire in defined:
                raise CircuitError(f"wire {wire} is written twice")
            defined.add(wire)
        for wire, width in zip(gate.outputs, gate_widths(gate, widths, circuit.field_modulus)):
            widths[wire] = width
    if defined != set(range(len(defined))):
        raise CircuitError("wire ids are not dense from 0")
    if len(set(circuit.output_wires)) != len(circuit.output_wires):
        raise CircuitError("output wires are not distinct")
    for wire in circuit.output_wires:
        if wire not in defined:
            raise CircuitError(f"output wire {wire} is never written")
        if wire in circuit.input_wires:
            raise CircuitError(f"wire {wire} is both input and output")
    return widths


class CircuitBuilder:
    """Appends gadgets to a growing circuit; wire ids are allocated densely."""

    def __init__(self, bit_width: int, field_modulus: int):
        check_field(bit_width, field_modulus)
        self.n = bit_width
        self.p = field_modulus
        self.gates: List[Gate] = []
        self.widths: Dict[int, int] = {}
        self.input_wires: List[int] = []
        self.output_wires: List[int] = []
        self.signed_wires: List[int] = []
        self.zero: Optional[int] = None
        self.one: Optional[int] = None
        self.constants: Dict[int, int] = {}
        self.constant_gates = 0
        self._const_value: Dict[int, int] = {}
        self._bits: Dict[int, Dict[int, int]] = {}
        self._nots: Dict[int, int] = {}
        self._compressed: Dict[tuple, int] = {}
        self._next = 0

    # -- plumbing -----------------------------------------------------------

    def _wire(self, width: int) -> int:
        wire = self._next
        self._next += 1
        self.widths[wire] = width
        return wire

    def gate(self, kind: str, inputs: List[int], outputs: int = 1, const: Optional[int] = None,
             bits: Optional[List[int]] = None) -> List[int]:
        gate = Gate(kind=kind, inputs=inputs, outputs=[], const=const, bits=bits or [])
        widths = gate_widths(gate.model_copy(update={"outputs": [0] * outputs}), self.widths, self.p)
        gate.outputs = [self._wire(width) for width in widths]
        self.gates.append(gate)
        return gate.outputs

    def input(self, signed: bool = False) -> int:
        wire = self._wire(self.n)
        self.input_wires.append(wire)
        if signed:
            self.signed_wires.append(wire)
        return wire

    def width(self, wire: int) -> int:
        return self.widths[wire]

    def build(self) -> Circuit:
        return Circuit(
            bit_width=self.n,
            field_modulus=self.p,
            gates=self.gates,
            input_wires=self.input_wires,
            output_wires=self.output_wires,
            signed_wires=sorted(self.signed_wires),
        )

    # -- constants ----------------------------------------------------------

    def emit_constants(self, needed: Iterable[int]) -> Dict[int, int]:
        """Zero and one, then every further constant as one * c: |needed - {0, 1}| + 2 gates."""
        if not self.input_wires:
            raise NoInputWire("constants are derived from an input wire; the circuit has none")
        (self.zero,) = self.gate("ZERO", [self.input_wires[0]])
        (self.one,) = self.gate("ONE", [self.zero])
        self.constants = {0: self.zero, 1: self.one}
        for value in sorted(set(needed) - {0, 1}):
            (self.constants[value],) = self.gate("MUL-CONST", [self.one], const=value % self.p)
        for value, wire in self.constants.items():
            self._const_value[wire] = value
        self.constant_gates = len(self.constants)
        logger.debug("synthesized %d constants in %d gates", len(self.constants) - 2, self.constant_gates)
        return dict(self.constants)

    def constant(self, value: int) -> int:
        return self.constants[value]

    # -- bits ---------------------------------------------------------------

    def bits_of(self, wire: int, positions: Sequence[int]) -> List[int]:
        """Bit wires of `wire`; one EXPAND keeps exactly the positions not seen before."""
        if wire in self._const_value:
            value = self._const_value[wire]
            return [self.one if (value >> i) & 1 else self.zero for i in positions]
        width = self.widths[wire]
        if width == 1:
            return [wire if i == 0 else self.zero for i in positions]
        cache = self._bits.setdefault(wire, {})
        missing = sorted({i for i in positions if i < width and i not in cache})
        if missing:
            outputs = self.gate("EXPAND", [wire], outputs=len(missing), bits=missing)
            cache.update(zip(missing, outputs))
        return [cache[i] if i < width else self.zero for i in positions]

    def compress(self, bits: List[int]) -> int:
        """Recompose bits (LSB first); trailing zero wires are dropped."""
        bits = list(bits)
        while bits and bits[-1] == self.zero:
            bits.pop()
        if not bits:
            return self.zero
        if len(bits) == 1:
            return bits[0]
        key = tuple(bits)
        if key not in self._compressed:
            (wire,) = self.gate("COMPRESS", bits)
            self._compressed[key] = wire
            self._bits[wire] = dict(enumerate(bits))
        return self._compressed[key]

    def truncate(self, wire: int, width: Optional[int] = None) -> int:
        """Reduce a wire modulo 2^width (default n) via EXPAND + COMPRESS."""
        width = width or self.n
        if self.widths[wire] <= width:
            return wire
        return self.compress(self.bits_of(wire, range(width)))

    # -- Boolean gadgets ----------------------------------------------------

    def emit_not(self, a: int) -> int:
        """1 - a on a 1-bit wire."""
        if a == self.zero:
            return self.one
        if a == self.one:
            return self.zero
        if a not in self._nots:
            self._require_bit(a)
            (minus,) = self.gate("MUL-CONST", [a], const=self.p - 1)
            (result,) = self.gate("ADD", [minus, self.one])
            self._nots[a] = result
            self._nots[result] = a
        return self._nots[a]

    def emit_bool(self, a: int, b: int, op: str) -> int:
        """AND = ab, OR = a + b - ab, XOR = a + b - 2ab on 1-bit wires."""
        self._require_bit(a)
        self._require_bit(b)
        if op == "AND":
            if self.zero in (a, b):
                return self.zero
            if a == self.one or a == b:
                return b
            if b == self.one:
                return a
            return self.gate("MUL", [a, b])[0]
        if op == "OR":
            if a == self.zero or a == b:
                return b
            if b == self.zero:
                return a
            if self.one in (a, b):
                return self.one
            factor = self.p - 1
        elif op == "XOR":
            if a == self.zero:
                return b
            if b == self.zero:
                return a
            if a == b:
                return self.zero
            if a == self.one:
                return self.emit_not(b)
            if b == self.one:
                return self.emit_not(a)
            factor = self.p - 2
        else:
            raise UnsupportedOp(f"unknown Boolean operator {op}")
        (total,) = self.gate("ADD", [a, b])
        (product,) = self.gate("MUL", [a, b])
        (scaled,) = self.gate("MUL-CONST", [product], const=factor)
        return self.gate("ADD", [total, scaled])[0]

    def _require_bit(self, wire: int) -> None:
        if self.widths[wire] != 1:
            raise WidthMismatch(f"wire {wire} is {self.widths[wire]} bits wide, Boolean gadget needs 1")

    # -- arithmetic gadgets -------------------------------------------------

    def emit_negate(self, a: int, width: Optional[int] = None) -> int:
        """Two's-complement negation: a * (2^w - 1) truncated to w bits."""
        width = width or self.n
        if a == self.zero:
            return self.zero
        (scaled,) = self.gate("MUL-CONST", [a], const=(1 << width) - 1)
        return self.truncate(scaled, width)

    def emit_add(self, a: int, b: int) -> int:
        if a == self.zero:
            return b
        if b == self.zero:
            return a
        return self.truncate(self.gate("ADD", [a, b])[0])

    def emit_sub(self, a: int, b: int) -> int:
        return self.emit_add(a, self.emit_negate(b))

    def emit_mul(self, a: int, b: int) -> int:
        if self.zero in (a, b):
            return self.zero
        return self.truncate(self.gate("MUL", [a, b])[0])

    def emit_mul_const(self, a: int, c: int) -> int:
        c &= (1 << self.n) - 1
        if c == 0 or a == self.zero:
            return self.zero
        if c == 1:
            return a
        return self.truncate(self.gate("MUL-CONST", [a], const=c)[0])

    def emit_is_zero(self, a: int, width: Optional[int] = None) -> int:
        """1 iff a == 0: expand, negate every bit, multiply the negations."""
        if a in self._const_value:
            return self.one if self._const_value[a] == 0 else self.zero
        width = width or self.widths[a]
        if self.widths[a] == 1:
            return self.emit_not(a)
        return self._none_set(self.bits_of(a, range(width)))

    def _none_set(self, bits: Sequence[int]) -> int:
        product = self.one
        for bit in bits:
            product = self.emit_bool(product, self.emit_not(bit), "AND")
        return product

    def _widen(self, a: int, signed: bool) -> int:
        """n-bit value as an (n+1)-bit two's-complement value."""
        if not signed or self.widths[a] < self.n:
            return a
        (sign,) = self.bits_of(a, [self.n - 1])
        if sign == self.zero:
            return a
        (extension,) = self.gate("MUL-CONST", [sign], const=1 << self.n)
        return self.gate("ADD", [a, extension])[0]

    def _difference(self, a: int, b: int, signed: bool) -> int:
        """a - b over n+1 bits; bit n is the sign."""
        m = self.n + 1
        wide_a, wide_b = self._widen(a, signed), self._widen(b, signed)
        return self.gate("ADD", [wide_a, self.emit_negate(wide_b, m)])[0]

    def emit_compare(self, a: int, b: int, rel: str, signed: bool = False) -> int:
        """LT/GT/LE/GE from the sign bit of the widened difference."""
        if rel in ("GT", "GE"):
            a, b = b, a
        m = self.n + 1
        diff = self._difference(a, b, signed)
        if rel in ("LT", "GT"):
            return self.bits_of(diff, [m - 1])[0]
        bits = self.bits_of(diff, range(m))
        return self.emit_bool(bits[m - 1], self._none_set(bits), "OR")

    def emit_eq(self, a: int, b: int) -> int:
        if b == self.zero:
            return self.emit_is_zero(a)
        if a == self.zero:
            return self.emit_is_zero(b)
        if self.widths[a] == 1 and self.widths[b] == 1:
            return self.emit_not(self.emit_bool(a, b, "XOR"))
        return self.emit_is_zero(self.emit_sub(a, b))

    def emit_mux(self, cond: int, a: int, b: int) -> int:
        """cond * a + (1 - cond) * b."""
        if self.widths[cond] != 1:
            cond = self.emit_not(self.emit_is_zero(cond))
        if a == b:
            return a
        if cond == self.one:
            return a
        if cond == self.zero:
            return b
        if self.widths[a] == 1 and self.widths[b] == 1:
            taken = self.emit_bool(cond, a, "AND")
            other = self.emit_bool(self.emit_not(cond), b, "AND")
            if taken == self.zero:
                return other
            if other == self.zero:
                return taken
            return self.gate("ADD", [taken, other])[0]
        terms = []
        if a != self.zero:
            terms.append(self.gate("MUL", [cond, a])[0])
        if b != self.zero:
            terms.append(self.gate("MUL", [self.emit_not(cond), b])[0])
        result = terms[0] if len(terms) == 1 else self.gate("ADD", terms)[0]
        return self.truncate(result)

    def emit_bitwise(self, a: int, b: int, op: str) -> int:
        """n-bit AND/OR/XOR: expand both, combine bit by bit, compress."""
        if self.widths[a] == 1 and self.widths[b] == 1:
            return self.emit_bool(a, b, op)
        positions = range(self.n)
        bits = [self.emit_bool(x, y, op) for x, y in zip(self.bits_of(a, positions), self.bits_of(b, positions))]
        return self.compress(bits)

    def emit_bitwise_not(self, a: int) -> int:
        return self.compress([self.emit_not(bit) for bit in self.bits_of(a, range(self.n))])

    def emit_shl(self, a: int, k: int) -> int:
        if k >= self.n:
            return self.zero
        return self.emit_mul_const(a, 1 << k)

    def emit_shr(self, a: int, k: int, signed: bool) -> int:
        """Right shift: keep bits k..n-1, fill with zeros or the sign bit."""
        k = min(k, self.n)
        kept = self.bits_of(a, range(k, self.n))
        fill = self.bits_of(a, [self.n - 1]) * k if signed else []
        return self.compress(kept + fill)

    # -- outputs ------------------------------------------------------------

    def bind_output(self, wire: int, signed: bool = False) -> int:
        """Declare an output; inputs, constants and repeated outputs get their own wire."""
        if wire in self.input_wires or wire in self._const_value or wire in self.output_wires:
            (wire,) = self.gate("ADD", [wire, self.zero])
        self.output_wires.append(wire)
        if signed:
            self.signed_wires.append(wire)
        return wire


def lower(prog: FlatProgram, field_modulus: int) -> Circuit:
    """Map every primitive expression onto gadgets."""
    builder = CircuitBuilder(prog.bit_width, field_modulus)
    env: Dict[str, int] = {}
    for port in prog.inputs:
        env[port.name] = builder.input(port.signed)
    builder.emit_constants(expr.args[0] for expr in prog.exprs if expr.op == "CONST")

    for expr in prog.exprs:
        op, args = expr.op, expr.args
        wires = [env[arg] for arg in args if isinstance(arg, str)]
        if op == "CONST":
            result = builder.constant(args[0])
        elif op == "MOV":
            result = wires[0]
        elif op == "ADD":
            result = builder.emit_add(*wires)
        elif op == "SUB":
            result = builder.emit_sub(*wires)
        elif op == "MUL":
            result = builder.emit_mul(*wires)
        elif op == "MUL-CONST":
            result = builder.emit_mul_const(wires[0], args[1])
        elif op in ("AND", "OR", "XOR"):
            result = builder.emit_bitwise(wires[0], wires[1], op)
        elif op == "NOT":
            result = builder.emit_bitwise_not(wires[0])
        elif op == "SHL-CONST":
            result = builder.emit_shl(wires[0], args[1])
        elif op == "SHR-CONST":
            result = builder.emit_shr(wires[0], args[1], expr.signed)
        elif op in ("LT", "GT", "LE", "GE"):
            result = builder.emit_compare(wires[0], wires[1], op, expr.signed)
        elif op == "EQ":
            result = builder.emit_eq(*wires)
        elif op == "NEQ":
            result = builder.emit_not(builder.emit_eq(*wires))
        elif op == "MUX":
            result = builder.emit_mux(*wires)
        else:
            raise UnsupportedOp(f"operator {op} has no gadget")
        env[expr.dest] = result

    for port in prog.outputs:
        builder.bind_output(env[port.name], port.signed)
    circuit = builder.build()
    logger.info(
        "lowered to %d gates (%d MUL), %d wires, %d constant gates",
        len(circuit.gates), circuit.num_mul_gates, circuit.num_wires, builder.constant_gates,
    )
    return circuit


def constant_gate_count(circuit: Circuit) -> int:
    """Length of the constant block: ZERO, ONE, then MUL-CONST gates scaling the one wire."""
    count, one = 0, None
    for gate in circuit.gates:
        if gate.kind == "ZERO" and count == 0:
            count = 1
        elif gate.kind == "ONE" and count == 1:
            one, count = gate.outputs[0], 2
        elif count >= 2 and gate.kind == "MUL-CONST" and gate.inputs == [one]:
            count += 1
        elif count:
            break
    return count


def apply_gate(gate: Gate, values: Mapping[int, int], p: int) -> List[int]:
    args = [values[wire] for wire in gate.inputs]
    if gate.kind == "ADD":
        return [(args[0] + args[1]) % p]
    if gate.kind == "MUL":
        return [(args[0] * args[1]) % p]
    if gate.kind == "MUL-CONST":
        return [(args[0] * gate.const) % p]
    if gate.kind == "ZERO":
        return [0]
    if gate.kind == "ONE":
        return [(args[0] + 1) % p]
    if gate.kind == "EXPAND":
        return [(args[0] >> bit) & 1 for bit in gate.bits]
    if gate.kind == "COMPRESS":
        return [sum(bit << j for j, bit in enumerate(args)) % p]
    raise UnsupportedOp(f"unknown gate {gate.kind}")


def evaluate(circuit: Circuit, inputs: Mapping[int, int]) -> Assignment:
    """Run the circuit; the assignment of every wire is the witness."""
    values: Dict[int, int] = {}
    limit = 1 << circuit.bit_width
    for wire in inputs:
        if wire not in circuit.input_wires:
            raise CircuitError(f"wire {wire} is not a circuit input")
    for wire in circuit.input_wires:
        if wire not in inputs:
            raise MissingInput(f"no value for input wire {wire}")
        value = inputs[wire]
        if not 0 <= value < limit:
            raise ValueOutOfRange(f"input wire {wire} = {value} does not fit {circuit.bit_width} bits")
        values[wire] = value
    for gate in circuit.gates:
        for wire, value in zip(gate.outputs, apply_gate(gate, values, circuit.field_modulus)):
            values[wire] = value
    return Assignment(values=values)


def check_assignment(circuit: Circuit, assignment: Assignment) -> None:
    """Completeness and gate-by-gate consistency of an assignment."""
    values = assignment.values
    p = circuit.field_modulus
    widths = wire_widths(circuit)
    for wire in widths:
        if wire not in values:
            raise InconsistentAssignment(f"wire {wire} has no value")
        if not 0 <= values[wire] < p:
            raise InconsistentAssignment(f"wire {wire} value is not a field element")
    for index, gate in enumerate(circuit.gates):
        if gate.kind == "EXPAND" and values[gate.inputs[0]] >= 1 << widths[gate.inputs[0]]:
            raise InconsistentAssignment(f"gate {index}: expanded value exceeds its {widths[gate.inputs[0]]} bits")
        expected = apply_gate(gate, values, p)
        actual = [values[wire] for wire in gate.outputs]
        if expected != actual:
            raise InconsistentAssignment(f"gate {index} ({gate.kind}) output {actual} != {expected}")


def output_values(circuit: Circuit, assignment: Assignment) -> List[int]:
    return [assignment.values[wire] for wire in circuit.output_wires]


def signed_io_positions(circuit: Circuit) -> List[int]:
    """Positions in inputs-then-outputs order whose wires carry signed values."""
    signed = set(circuit.signed_wires)
    io = list(circuit.input_wires) + list(circuit.output_wires)
    return [position for position, wire in enumerate(io) if wire in signed]
