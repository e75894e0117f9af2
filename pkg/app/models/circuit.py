from typing import Dict, List, Literal, Optional

from pydantic import BaseModel


GateKind = Literal["ADD", "MUL", "MUL-CONST", "EXPAND", "COMPRESS", "ZERO", "ONE"]


class Wire(BaseModel):
    """Circuit wire with its derived bit width."""
    id: int
    width: int
    signed: bool = False


class Gate(BaseModel):
    """
    One circuit gate.

    `const` is the MUL-CONST factor; `bits` lists the bit positions an EXPAND
    keeps, aligned with `outputs`.
    """
    kind: GateKind
    inputs: List[int]
    outputs: List[int]
    const: Optional[int] = None
    bits: List[int] = []


class Circuit(BaseModel):
    """Topologically ordered arithmetic circuit over a prime field."""
    bit_width: int
    field_modulus: int
    gates: List[Gate]
    input_wires: List[int]
    output_wires: List[int]
    signed_wires: List[int] = []

    @property
    def num_mul_gates(self) -> int:
        return sum(1 for gate in self.gates if gate.kind == "MUL")

    @property
    def num_wires(self) -> int:
        ids = set(self.input_wires)
        for gate in self.gates:
            ids.update(gate.outputs)
        return len(ids)


class Assignment(BaseModel):
    """Value of every wire (the witness of one execution)."""
    values: Dict[int, int]
