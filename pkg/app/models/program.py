"""
Models produced by the contract frontend: source units, the symbol table
and the flattened straight-line program.
"""

from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field


SymbolKind = Literal["function", "struct", "constant", "global-var", "param", "local"]

PrimOp = Literal[
    "ADD", "SUB", "MUL", "MUL-CONST",
    "AND", "OR", "XOR", "NOT",
    "SHL-CONST", "SHR-CONST",
    "LT", "GT", "LE", "GE", "EQ", "NEQ",
    "MUX", "CONST", "MOV",
]


class SourceUnit(BaseModel):
    """Contract sources as (path, text) pairs; the first file is compiled."""
    files: List[Tuple[str, str]]
    entry_name: str = "contract"


class Symbol(BaseModel):
    """One named entity of the contract."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    kind: SymbolKind
    type: str
    value: Optional[int] = None
    line: Optional[int] = None
    scope: Optional["Scope"] = None
    node: Any = Field(default=None, exclude=True, repr=False)


class Scope(BaseModel):
    """Block scope: its own symbols plus nested block scopes."""
    symbols: Dict[str, Symbol] = {}
    children: List["Scope"] = []


class SymbolTable(BaseModel):
    """Global symbols of the merged translation unit."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    globals: Dict[str, Symbol]
    entry: str
    path: str = "<contract>"
    ast: Any = Field(default=None, exclude=True, repr=False)
    # merged line -> (source path, line)
    line_map: List[Tuple[str, int]] = Field(default_factory=list, exclude=True, repr=False)

    def lookup(self, name: str, scopes: Optional[List[Scope]] = None) -> Optional[Symbol]:
        """Resolve innermost scope first, then globals."""
        for scope in reversed(scopes or []):
            if name in scope.symbols:
                return scope.symbols[name]
        return self.globals.get(name)


class Port(BaseModel):
    """Named input or output of a flat program."""
    name: str
    signed: bool = False


class PrimExpr(BaseModel):
    """Single-assignment primitive expression `dest = op(args)`."""
    dest: str
    op: PrimOp
    args: List[Union[int, str]]
    signed: bool = False


class FlatProgram(BaseModel):
    bit_width: int
    inputs: List[Port]
    outputs: List[Port]
    exprs: List[PrimExpr]


Symbol.model_rebuild()
