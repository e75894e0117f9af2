"""
Line-oriented text form of FlatProgram.

    bitwidth 16
    input i1 unsigned
    output o unsigned
    val = ADD(i1, i2)
    o = MOV(val)

A trailing `signed` marks signed comparisons and arithmetic right shifts.
"""

from __future__ import annotations

import re
from typing import List, Optional, Set

from app.models.program import FlatProgram, Port, PrimExpr
from app.services.errors import FrontendError, ParseError
from app.services.semantics import is_literal


EXPR_RE = re.compile(r"^([A-Za-z_]\w*)\s*=\s*([A-Z][A-Z-]*)\((.*)\)\s*(signed)?$")
OPERAND_COUNT = {
    "CONST": 1, "MOV": 1, "NOT": 1, "MUX": 3,
}


def check_program(prog: FlatProgram, path: Optional[str] = None) -> None:
    """Single assignment, topological order, every output written once."""
    defined: Set[str] = set()
    for port in prog.inputs:
        if port.name in defined:
            raise FrontendError(f"duplicate input '{port.name}'", path=path)
        defined.add(port.name)
    for expr in prog.exprs:
        if expr.dest in defined:
            raise FrontendError(f"'{expr.dest}' assigned twice", path=path)
        expected = OPERAND_COUNT.get(expr.op, 2)
        if len(expr.args) != expected:
            raise FrontendError(f"{expr.op} takes {expected} operands, got {len(expr.args)}", path=path)
        for position, arg in enumerate(expr.args):
            if is_literal(expr.op, position):
                if not isinstance(arg, int):
                    raise FrontendError(f"{expr.op} operand {position} must be a literal", path=path)
            elif arg not in defined:
                raise FrontendError(f"'{arg}' used before assignment in '{expr.dest}'", path=path)
        defined.add(expr.dest)
    for port in prog.outputs:
        if port.name not in defined:
            raise FrontendError(f"output '{port.name}' never written", path=path)


def serialize_program(prog: FlatProgram) -> str:
    lines = [f"bitwidth {prog.bit_width}"]
    for port in prog.inputs:
        lines.append(f"input {port.name} {'signed' if port.signed else 'unsigned'}")
    for port in prog.outputs:
        lines.append(f"output {port.name} {'signed' if port.signed else 'unsigned'}")
    for expr in prog.exprs:
        args = ", ".join(str(arg) for arg in expr.args)
        suffix = " signed" if expr.signed else ""
        lines.append(f"{expr.dest} = {expr.op}({args}){suffix}")
    return "\n".join(lines) + "\n"


def parse_program(text: str, path: str = "<program>") -> FlatProgram:
    bit_width: Optional[int] = None
    inputs: List[Port] = []
    outputs: List[Port] = []
    exprs: List[PrimExpr] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, _, rest = line.partition(" ")
        if head == "bitwidth":
            try:
                bit_width = int(rest)
            except ValueError as exc:
                raise ParseError(f"bad bitwidth '{rest}'", path=path, line=lineno) from exc
            continue
        if head in ("input", "output") and "=" not in line:
            fields = rest.split()
            if len(fields) != 2 or fields[1] not in ("signed", "unsigned"):
                raise ParseError(f"bad {head} declaration", path=path, line=lineno)
            port = Port(name=fields[0], signed=fields[1] == "signed")
            (inputs if head == "input" else outputs).append(port)
            continue
        match = EXPR_RE.match(line)
        if not match:
            raise ParseError(f"cannot parse '{line}'", path=path, line=lineno)
        dest, op, arg_text, signed = match.groups()
        args = [a.strip() for a in arg_text.split(",")] if arg_text.strip() else []
        parsed = []
        for position, arg in enumerate(args):
            if is_literal(op, position):
                try:
                    parsed.append(int(arg))
                except ValueError as exc:
                    raise ParseError(f"literal expected, got '{arg}'", path=path, line=lineno) from exc
            else:
                parsed.append(arg)
        try:
            exprs.append(PrimExpr(dest=dest, op=op, args=parsed, signed=bool(signed)))
        except ValueError as exc:
            raise ParseError(f"unknown operator '{op}'", path=path, line=lineno) from exc
    if bit_width is None:
        raise ParseError("missing bitwidth header", path=path, line=1)
    prog = FlatProgram(bit_width=bit_width, inputs=inputs, outputs=outputs, exprs=exprs)
    check_program(prog, path)
    return prog
