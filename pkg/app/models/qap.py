from typing import Dict, List, Optional

from pydantic import BaseModel


class FieldPoly(BaseModel):
    """Polynomial over GF(modulus), coefficients in ascending degree order."""
    coeffs: List[int]
    modulus: int

    @property
    def degree(self) -> int:
        # zero polynomial has degree -1
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs


class AuxBit(BaseModel):
    """Bit variable not exposed as a circuit wire (dropped by an optimized EXPAND)."""
    index: int
    source_wire: int
    bit: int


class QAP(BaseModel):
    """
    Quadratic arithmetic program of a circuit.

    Variable order: inputs, outputs, the unit variable (if used), then the
    internal variables. `wire_index` maps circuit wire ids to variable indices.
    """
    field_modulus: int
    v: List[FieldPoly]
    w: List[FieldPoly]
    y: List[FieldPoly]
    t: FieldPoly
    roots: List[int]
    n_in: int
    n_out: int
    unit_index: Optional[int] = None
    wire_index: Dict[int, int]
    aux_bits: List[AuxBit] = []
    # circuit bit width and the IO positions read as signed
    bit_width: Optional[int] = None
    signed_io: List[int] = []

    @property
    def n_io(self) -> int:
        return self.n_in + self.n_out

    @property
    def k(self) -> int:
        return len(self.v)

    @property
    def d(self) -> int:
        return len(self.roots)

    @property
    def internal_indices(self) -> List[int]:
        return [i for i in range(self.n_io, self.k) if i != self.unit_index]


class WitnessVector(BaseModel):
    a: List[int]
