"""
Directive text form of circuits.

    bitwidth 4
    field 2305843009213693951
    inputs 0 1
    outputs 9
    signed 0
    ADD [0 1] TO [5]
    EXPAND [5] TO [0 -> 6, 1 -> 8]
"""

from __future__ import annotations

import re
from typing import List, Optional

from app.models.circuit import Circuit, Gate
from app.services.circuit import validate_circuit
from app.services.errors import ParseError


GATE_RE = re.compile(r"^(ADD|MUL-CONST|MUL|ZERO|ONE|COMPRESS|EXPAND)\s*\[([^\]]*)\]\s*(?:BY\s+(\d+)\s+)?TO\s*\[([^\]]*)\]$")
BIT_RE = re.compile(r"^(\d+)\s*->\s*(\d+)$")


def _ids(values: List[int]) -> str:
    return " ".join(str(v) for v in values)


def serialize_gate(gate: Gate) -> str:
    if gate.kind == "EXPAND":
        targets = ", ".join(f"{bit} -> {wire}" for bit, wire in zip(gate.bits, gate.outputs))
        return f"EXPAND [{_ids(gate.inputs)}] TO [{targets}]"
    if gate.kind == "MUL-CONST":
        return f"MUL-CONST [{_ids(gate.inputs)}] BY {gate.const} TO [{_ids(gate.outputs)}]"
    return f"{gate.kind} [{_ids(gate.inputs)}] TO [{_ids(gate.outputs)}]"


def serialize_circuit(circuit: Circuit) -> str:
    lines = [
        f"bitwidth {circuit.bit_width}",
        f"field {circuit.field_modulus}",
        f"inputs {_ids(circuit.input_wires)}".rstrip(),
        f"outputs {_ids(circuit.output_wires)}".rstrip(),
    ]
    if circuit.signed_wires:
        lines.append(f"signed {_ids(circuit.signed_wires)}")
    lines.extend(serialize_gate(gate) for gate in circuit.gates)
    return "\n".join(lines) + "\n"


def _parse_ids(text: str, path: str, lineno: int) -> List[int]:
    try:
        return [int(token) for token in text.split()]
    except ValueError as exc:
        raise ParseError(f"wire ids expected, got '{text.strip()}'", path=path, line=lineno) from exc


def parse_gate(line: str, path: str = "<circuit>", lineno: Optional[int] = None) -> Gate:
    match = GATE_RE.match(line)
    if not match:
        raise ParseError(f"unknown directive '{line}'", path=path, line=lineno)
    kind, sources, const, targets = match.groups()
    if (const is None) == (kind == "MUL-CONST"):
        raise ParseError(f"BY clause is only valid on MUL-CONST: '{line}'", path=path, line=lineno)
    inputs = _parse_ids(sources, path, lineno)
    if kind != "EXPAND":
        return Gate(kind=kind, inputs=inputs, outputs=_parse_ids(targets, path, lineno),
                    const=int(const) if const is not None else None)
    bits, outputs = [], []
    for item in targets.split(","):
        pair = BIT_RE.match(item.strip())
        if not pair:
            raise ParseError(f"bad EXPAND target '{item.strip()}'", path=path, line=lineno)
        bits.append(int(pair.group(1)))
        outputs.append(int(pair.group(2)))
    return Gate(kind=kind, inputs=inputs, outputs=outputs, bits=bits)


def parse_circuit(text: str, path: str = "<circuit>") -> Circuit:
    header = {}
    gates: List[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, _, rest = line.partition(" ")
        if head in ("bitwidth", "field", "inputs", "outputs", "signed"):
            if gates:
                raise ParseError(f"header line '{head}' after the first gate", path=path, line=lineno)
            header[head] = _parse_ids(rest, path, lineno)
            continue
        gates.append(parse_gate(line, path, lineno))
    for key in ("bitwidth", "field"):
        if len(header.get(key, [])) != 1:
            raise ParseError(f"missing or malformed '{key}' header", path=path, line=1)
    circuit = Circuit(
        bit_width=header["bitwidth"][0],
        field_modulus=header["field"][0],
        gates=gates,
        input_wires=header.get("inputs", []),
        output_wires=header.get("outputs", []),
        signed_wires=header.get("signed", []),
    )
    validate_circuit(circuit)
    return circuit
