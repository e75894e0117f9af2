"""
Quadratic arithmetic programs.

Every multiplication gate, every expanded bit and every output produced by a
linear gate becomes one constraint L * R = O over linear combinations of the
QAP variables. Linear gates (ADD, MUL-CONST, COMPRESS, ZERO, ONE) never get a
constraint of their own; they are folded into the combinations that read them.
"""

from __future__ import annotations

import logging
from typing import Dict, Hashable, List, Optional, Tuple

from app.models.circuit import Assignment, Circuit
from app.models.qap import QAP, AuxBit, FieldPoly, WitnessVector
from app.services import field
from app.services.circuit import check_assignment, signed_io_positions, wire_widths
from app.services.errors import DimensionMismatch, NoMultiplicationGates, ParseError


logger = logging.getLogger(__name__)

UNIT = "unit"
Combination = Dict[Hashable, int]
Constraint = Tuple[Combination, Combination, Combination]


def _var(wire: int) -> Tuple[str, int]:
    return ("wire", wire)


def _add(a: Combination, b: Combination, p: int, factor: int = 1) -> Combination:
    result = dict(a)
    for key, coeff in b.items():
        result[key] = (result.get(key, 0) + factor * coeff) % p
        if not result[key]:
            del result[key]
    return result


def _scale(a: Combination, factor: int, p: int) -> Combination:
    scaled = {key: coeff * factor % p for key, coeff in a.items()}
    return {key: coeff for key, coeff in scaled.items() if coeff}


def constraints_of(circuit: Circuit) -> Tuple[List[Constraint], List[Hashable]]:
    """Rank-1 constraints and the internal variables in creation order."""
    p = circuit.field_modulus
    widths = wire_widths(circuit)
    outputs = set(circuit.output_wires)
    combos: Dict[int, Combination] = {wire: {_var(wire): 1} for wire in circuit.input_wires}
    constraints: List[Constraint] = []
    internal: List[Hashable] = []

    def new_variable(wire: int) -> Combination:
        if wire not in outputs:
            internal.append(_var(wire))
        return {_var(wire): 1}

    for gate in circuit.gates:
        args = [combos[wire] for wire in gate.inputs]
        if gate.kind == "MUL":
            (out,) = gate.outputs
            combos[out] = new_variable(out)
            constraints.append((args[0], args[1], combos[out]))
            continue
        if gate.kind == "EXPAND":
            source = gate.inputs[0]
            kept = dict(zip(gate.bits, gate.outputs))
            recomposed: Combination = {}
            for bit in range(widths[source]):
                if bit in kept:
                    combos[kept[bit]] = new_variable(kept[bit])
                    key = _var(kept[bit])
                else:
                    key = ("aux", source, bit)
                    internal.append(key)
                # b * (b - 1) = 0
                constraints.append(({key: 1}, {key: 1, UNIT: p - 1}, {}))
                recomposed[key] = pow(2, bit, p)
            constraints.append((recomposed, {UNIT: 1}, args[0]))
            continue
        if gate.kind == "ZERO":
            combo: Combination = {}
        elif gate.kind == "ONE":
            combo = _add(args[0], {UNIT: 1}, p)
        elif gate.kind == "ADD":
            combo = _add(args[0], args[1], p)
        elif gate.kind == "MUL-CONST":
            combo = _scale(args[0], gate.const, p)
        else:
            combo = {}
            for j, arg in enumerate(args):
                combo = _add(combo, arg, p, pow(2, j, p))
        (out,) = gate.outputs
        if out in outputs:
            # linear output: combination * 1 = out
            constraints.append((combo, {UNIT: 1}, {_var(out): 1}))
            combo = {_var(out): 1}
        combos[out] = combo
    return constraints, internal


def build_qap(circuit: Circuit) -> QAP:
    p = circuit.field_modulus
    constraints, internal = constraints_of(circuit)
    if not constraints:
        raise NoMultiplicationGates("circuit yields no constraints (no multiplications, expansions or outputs)")

    order: List[Hashable] = [_var(w) for w in circuit.input_wires] + [_var(w) for w in circuit.output_wires]
    uses_unit = any(UNIT in combo for constraint in constraints for combo in constraint)
    unit_index = len(order) if uses_unit else None
    if uses_unit:
        order.append(UNIT)
    order.extend(internal)
    index = {key: i for i, key in enumerate(order)}

    d = len(constraints)
    roots = list(range(1, d + 1))
    basis = field.lagrange_basis(roots, p)
    columns: List[List[Dict[int, int]]] = [[{} for _ in order] for _ in range(3)]
    for g, constraint in enumerate(constraints):
        for side, combo in enumerate(constraint):
            for key, coeff in combo.items():
                columns[side][index[key]][g] = coeff
    v, w, y = ([field.interpolate_on(basis, values, p) for values in column] for column in columns)

    qap = QAP(
        field_modulus=p,
        v=v,
        w=w,
        y=y,
        t=field.vanishing(roots, p),
        roots=roots,
        n_in=len(circuit.input_wires),
        n_out=len(circuit.output_wires),
        unit_index=unit_index,
        wire_index={key[1]: i for key, i in index.items() if isinstance(key, tuple) and key[0] == "wire"},
        bit_width=circuit.bit_width,
        signed_io=signed_io_positions(circuit),
        aux_bits=[AuxBit(index=index[key], source_wire=key[1], bit=key[2])
                  for key in internal if key[0] == "aux"],
    )
    logger.info("QAP: %d variables, degree %d (%d io, %d aux bits)", qap.k, qap.d, qap.n_io, len(qap.aux_bits))
    return qap


def witness(circuit: Circuit, assignment: Assignment, qap: Optional[QAP] = None) -> WitnessVector:
    """Order a consistent assignment by QAP variable index."""
    check_assignment(circuit, assignment)
    qap = qap or build_qap(circuit)
    values = assignment.values
    a = [0] * qap.k
    for wire, i in qap.wire_index.items():
        a[i] = values[wire]
    if qap.unit_index is not None:
        a[qap.unit_index] = 1
    for aux in qap.aux_bits:
        a[aux.index] = (values[aux.source_wire] >> aux.bit) & 1
    return WitnessVector(a=a)


def compute_p(qap: QAP, a: WitnessVector) -> FieldPoly:
    """(sum a_i v_i) * (sum a_i w_i) - (sum a_i y_i)."""
    if len(a.a) != qap.k:
        raise DimensionMismatch(f"witness has {len(a.a)} entries, QAP has {qap.k} variables")
    p = qap.field_modulus
    left = field.linear_combination(qap.v, a.a, p)
    right = field.linear_combination(qap.w, a.a, p)
    out = field.linear_combination(qap.y, a.a, p)
    return field.sub(field.mul(left, right), out)


def divide_by_t(p_poly: FieldPoly, t: FieldPoly) -> FieldPoly:
    """h = p / t; NotDivisible carries the remainder when t does not divide p."""
    return field.divide_exact(p_poly, t)


# -- text form --------------------------------------------------------------

def _row(label: str, poly: FieldPoly, i: Optional[int] = None) -> str:
    head = label if i is None else f"{label} {i}"
    return " ".join([head] + [str(c) for c in poly.coeffs])


def serialize_qap(qap: QAP) -> str:
    lines = [
        f"field {qap.field_modulus}",
        f"wires {qap.k}",
        f"degree {qap.d}",
        f"io {qap.n_in} {qap.n_out}",
        f"unit {'-' if qap.unit_index is None else qap.unit_index}",
        " ".join(["roots"] + [str(r) for r in qap.roots]),
    ]
    if qap.bit_width is not None:
        lines.append(f"bitwidth {qap.bit_width}")
    if qap.signed_io:
        lines.append(" ".join(["signed"] + [str(i) for i in qap.signed_io]))
    lines.extend(f"wire {wire} {i}" for wire, i in sorted(qap.wire_index.items()))
    lines.extend(f"aux {aux.index} {aux.source_wire} {aux.bit}" for aux in qap.aux_bits)
    for label, polys in (("v", qap.v), ("w", qap.w), ("y", qap.y)):
        lines.extend(_row(label, poly, i) for i, poly in enumerate(polys))
    lines.append(_row("t", qap.t))
    return "\n".join(lines) + "\n"


def parse_qap(text: str, path: str = "<qap>") -> QAP:
    header: Dict[str, List[str]] = {}
    wire_index: Dict[int, int] = {}
    aux_bits: List[AuxBit] = []
    rows: Dict[str, Dict[int, List[int]]] = {"v": {}, "w": {}, "y": {}}
    t_coeffs: Optional[List[int]] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        fields = raw.split()
        if not fields:
            continue
        try:
            head, rest = fields[0], fields[1:]
            if head in ("field", "wires", "degree", "io", "unit", "roots", "bitwidth", "signed"):
                header[head] = rest
            elif head == "wire":
                wire_index[int(rest[0])] = int(rest[1])
            elif head == "aux":
                aux_bits.append(AuxBit(index=int(rest[0]), source_wire=int(rest[1]), bit=int(rest[2])))
            elif head in rows:
                rows[head][int(rest[0])] = [int(c) for c in rest[1:]]
            elif head == "t":
                t_coeffs = [int(c) for c in rest]
            else:
                raise ParseError(f"unknown QAP line '{head}'", path=path, line=lineno)
        except (ValueError, IndexError) as exc:
            raise ParseError(f"malformed QAP line '{raw.strip()}'", path=path, line=lineno) from exc
    missing = [key for key in ("field", "wires", "io", "unit", "roots") if key not in header]
    if missing or t_coeffs is None:
        raise ParseError(f"QAP text lacks {', '.join(missing) or 't'}", path=path)
    p = int(header["field"][0])
    k = int(header["wires"][0])
    polys = {
        label: [field.make_poly(rows[label].get(i, []), p) for i in range(k)]
        for label in rows
    }
    unit = header["unit"][0]
    return QAP(
        field_modulus=p,
        v=polys["v"],
        w=polys["w"],
        y=polys["y"],
        t=field.make_poly(t_coeffs, p),
        roots=[int(r) for r in header["roots"]],
        n_in=int(header["io"][0]),
        n_out=int(header["io"][1]),
        unit_index=None if unit == "-" else int(unit),
        wire_index=wire_index,
        aux_bits=aux_bits,
        bit_width=int(header["bitwidth"][0]) if "bitwidth" in header else None,
        signed_io=[int(i) for i in header.get("signed", [])],
    )
