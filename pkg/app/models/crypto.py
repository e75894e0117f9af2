"""
Public parameters and proofs.

Group elements are kept as whatever the active backend uses (plain integers
for the mock backend); text encoding is delegated to the backend.
"""

from typing import Any, List, Optional

from pydantic import BaseModel


class EvaluationKey(BaseModel):
    """Worker-side key: encodings of every QAP polynomial at the secret point."""
    backend: str
    modulus: int
    n_io: int
    unit_index: Optional[int] = None
    vP: List[Any]
    wQ: List[Any]
    yP: List[Any]
    sQ_powers: List[Any]


class VerificationKey(BaseModel):
    """Verifier-side key: IO encodings, unit encodings and t(s)·P."""
    backend: str
    modulus: int
    n_in: int
    n_out: int
    P: Any
    Q: Any
    tP: Any
    vP_io: List[Any]
    wQ_io: List[Any]
    yP_io: List[Any]
    vP_one: Optional[Any] = None
    wQ_one: Optional[Any] = None
    yP_one: Optional[Any] = None
    # how the verifier turns decimal IO values into n-bit patterns
    bit_width: Optional[int] = None
    signed_io: List[int] = []

    @property
    def n_io(self) -> int:
        return self.n_in + self.n_out


class Proof(BaseModel):
    """Proof of correct execution."""
    V_mid: Any
    W_mid: Any
    Y_mid: Any
    H: Any
