"""
Contract frontend: symbol table construction and flattening.

The flattener is a symbolic executor over the pycparser AST. Fields of the
input struct are symbols; everything that does not depend on them is
evaluated at compile time. What remains is emitted as single-assignment
primitive expressions. Input-dependent `if` statements run both branches and
merge every written variable with a MUX.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, replace
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Set, Tuple, Type, Union

from pycparser import c_ast, c_generator, c_parser

from app.models.config import BIT_WIDTH, MAX_UNROLL
from app.models.program import FlatProgram, Port, PrimExpr, Scope, SourceUnit, Symbol, SymbolTable
from app.services.errors import (
    DuplicateSymbol,
    DynamicIndex,
    EntrySignatureMismatch,
    FrontendError,
    MissingEntryPoint,
    MissingInput,
    ParseError,
    UnboundedLoop,
    UndefinedSymbol,
    UnsupportedConstruct,
)
from app.services.preprocessor import Preprocessor
from app.services.program_format import check_program
from app.services.semantics import apply_op, encode, interpret, mask, to_signed


logger = logging.getLogger(__name__)

INTEGER_WORDS = {"int", "unsigned", "signed", "long", "short", "char"}
ENTRY_STRUCTS = ("in_T", "out_T")
PARSE_LINE_RE = re.compile(r":(\d+):")


# ---------------------------------------------------------------------------
# Locations
# ---------------------------------------------------------------------------

class Locator:
    """Maps AST coordinates of the merged unit back to source files."""

    def __init__(self, path: str, line_map: Optional[List[Tuple[str, int]]] = None):
        self.path = path
        self.line_map = line_map or []

    def position(self, line: Optional[int]) -> Tuple[str, Optional[int]]:
        if line is None:
            return self.path, None
        if 0 < line <= len(self.line_map):
            return self.line_map[line - 1]
        return self.path, line

    def error(self, cls: Type[FrontendError], message: str, node: Optional[c_ast.Node] = None) -> FrontendError:
        line = node.coord.line if node is not None and node.coord is not None else None
        path, line = self.position(line)
        return cls(message, path=path, line=line)


# ---------------------------------------------------------------------------
# C types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntType:
    signed: bool = True

    def __str__(self) -> str:
        return "int" if self.signed else "unsigned int"


@dataclass(frozen=True)
class VoidType:
    def __str__(self) -> str:
        return "void"


@dataclass(frozen=True)
class StructType:
    name: str
    fields: Tuple[Tuple[str, "CType"], ...]

    def __str__(self) -> str:
        return f"struct {self.name}"


@dataclass(frozen=True)
class ArrayType:
    elem: "CType"
    length: int

    def __str__(self) -> str:
        return f"{self.elem}[{self.length}]"


@dataclass(frozen=True)
class PointerType:
    target: "CType"

    def __str__(self) -> str:
        return f"{self.target}*"


CType = Union[IntType, VoidType, StructType, ArrayType, PointerType]


def resolve_type(
    node: c_ast.Node,
    struct_nodes: Mapping[str, c_ast.Struct],
    dim: Callable[[c_ast.Node], int],
    locator: Locator,
) -> CType:
    """Decode a pycparser type node."""
    if isinstance(node, (c_ast.TypeDecl, c_ast.Typename)):
        return resolve_type(node.type, struct_nodes, dim, locator)
    if isinstance(node, c_ast.IdentifierType):
        names = node.names
        if any(word in ("float", "double") for word in names):
            raise locator.error(UnsupportedConstruct, "floating point types are not supported", node)
        if names == ["void"]:
            return VoidType()
        if any(word not in INTEGER_WORDS for word in names):
            raise locator.error(UnsupportedConstruct, f"unknown type '{' '.join(names)}'", node)
        return IntType(signed="unsigned" not in names)
    if isinstance(node, c_ast.Struct):
        definition = node if node.decls is not None else struct_nodes.get(node.name)
        if definition is None:
            raise locator.error(UndefinedSymbol, f"struct {node.name} is not defined", node)
        fields = tuple(
            (decl.name, resolve_type(decl.type, struct_nodes, dim, locator)) for decl in definition.decls
        )
        return StructType(node.name, fields)
    if isinstance(node, c_ast.ArrayDecl):
        elem = resolve_type(node.type, struct_nodes, dim, locator)
        if node.dim is None:
            return PointerType(elem)
        return ArrayType(elem, dim(node.dim))
    if isinstance(node, c_ast.PtrDecl):
        return PointerType(resolve_type(node.type, struct_nodes, dim, locator))
    raise locator.error(UnsupportedConstruct, f"unsupported type {type(node).__name__}", node)


def describe_type(node: c_ast.Node) -> str:
    """Printable type of a declaration, used in the symbol table."""
    if isinstance(node, (c_ast.TypeDecl, c_ast.Typename)):
        return describe_type(node.type)
    if isinstance(node, c_ast.IdentifierType):
        return " ".join(node.names)
    if isinstance(node, c_ast.Struct):
        return f"struct {node.name}"
    if isinstance(node, c_ast.PtrDecl):
        return describe_type(node.type) + "*"
    if isinstance(node, c_ast.ArrayDecl):
        size = c_generator.CGenerator().visit(node.dim) if node.dim is not None else ""
        return f"{describe_type(node.type)}[{size}]"
    if isinstance(node, c_ast.FuncDecl):
        params = [describe_type(p.type) for p in function_params(node)]
        return f"{describe_type(node.type)}({', '.join(params)})"
    return type(node).__name__


def function_params(decl: c_ast.FuncDecl) -> List[c_ast.Node]:
    params = list(decl.args.params) if decl.args is not None else []
    # `f(void)` declares no parameters
    if len(params) == 1 and isinstance(params[0], c_ast.Typename) and describe_type(params[0].type) == "void":
        return []
    return params


def parse_literal(node: c_ast.Constant, locator: Locator) -> Tuple[int, bool]:
    """Integer value of a C literal and whether it has an unsigned suffix."""
    text = node.value
    if node.type == "char":
        body = text[1:-1].encode().decode("unicode_escape")
        return ord(body[0]), False
    if "int" not in node.type:
        raise locator.error(UnsupportedConstruct, f"unsupported literal {text}", node)
    digits = text.rstrip("uUlL")
    unsigned = "u" in text[len(digits):].lower()
    if digits.lower().startswith(("0x", "0b")):
        value = int(digits, 0)
    elif len(digits) > 1 and digits.startswith("0"):
        value = int(digits, 8)
    else:
        value = int(digits)
    return value, unsigned


def fold_constant(node: c_ast.Node, table: Dict[str, Symbol], locator: Locator) -> int:
    """Evaluate a global initializer or array size with unbounded integers."""
    if isinstance(node, c_ast.Constant):
        return parse_literal(node, locator)[0]
    if isinstance(node, c_ast.ID):
        symbol = table.get(node.name)
        if symbol is None or symbol.kind != "constant" or symbol.value is None:
            raise locator.error(UnsupportedConstruct, f"'{node.name}' is not a compile-time constant", node)
        return symbol.value
    if isinstance(node, c_ast.UnaryOp) and node.op in ("-", "+", "~", "!"):
        value = fold_constant(node.expr, table, locator)
        return {"-": -value, "+": value, "~": ~value, "!": int(not value)}[node.op]
    if isinstance(node, c_ast.BinaryOp):
        a = fold_constant(node.left, table, locator)
        b = fold_constant(node.right, table, locator)
        if node.op in ("/", "%"):
            if b == 0:
                raise locator.error(UnsupportedConstruct, "division by zero", node)
            quotient = abs(a) // abs(b) * (1 if (a >= 0) == (b >= 0) else -1)
            return quotient if node.op == "/" else a - quotient * b
        operators = {
            "+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b,
            "<<": lambda: a << b, ">>": lambda: a >> b,
            "&": lambda: a & b, "|": lambda: a | b, "^": lambda: a ^ b,
            "<": lambda: int(a < b), ">": lambda: int(a > b),
            "<=": lambda: int(a <= b), ">=": lambda: int(a >= b),
            "==": lambda: int(a == b), "!=": lambda: int(a != b),
            "&&": lambda: int(bool(a) and bool(b)), "||": lambda: int(bool(a) or bool(b)),
        }
        if node.op in operators:
            return operators[node.op]()
    if isinstance(node, c_ast.Cast):
        return fold_constant(node.expr, table, locator)
    raise locator.error(UnsupportedConstruct, "expression is not a compile-time constant", node)


# ---------------------------------------------------------------------------
# Symbol table
# ---------------------------------------------------------------------------

class SymbolCollector(c_ast.NodeVisitor):
    """Collects global symbols and the local scope hierarchy of every function."""

    def __init__(self, locator: Locator):
        self.locator = locator
        self.globals: Dict[str, Symbol] = {}
        self.struct_nodes: Dict[str, c_ast.Struct] = {}
        self.scopes: List[Scope] = []

    def visit_FileAST(self, node: c_ast.FileAST) -> None:
        for ext in node.ext:
            if isinstance(ext, c_ast.FuncDef):
                self._function(ext)
            elif isinstance(ext, c_ast.Decl):
                self._global_decl(ext)
            elif isinstance(ext, c_ast.Typedef):
                raise self.locator.error(UnsupportedConstruct, "typedef is not supported", ext)
            elif not isinstance(ext, c_ast.Pragma):
                raise self.locator.error(UnsupportedConstruct, f"unsupported declaration {type(ext).__name__}", ext)

    def _register(self, symbol: Symbol, node: c_ast.Node) -> None:
        if symbol.name in self.globals:
            raise self.locator.error(DuplicateSymbol, f"'{symbol.name}' is already declared", node)
        self.globals[symbol.name] = symbol

    def _struct(self, node: c_ast.Struct) -> None:
        if node.decls is None:
            return
        if node.name is None:
            raise self.locator.error(UnsupportedConstruct, "anonymous structs are not supported", node)
        seen: Set[str] = set()
        for decl in node.decls:
            if decl.name in seen:
                raise self.locator.error(DuplicateSymbol, f"field '{decl.name}' repeated in struct {node.name}", decl)
            seen.add(decl.name)
        symbol = Symbol(
            name=node.name, kind="struct", type=f"struct {node.name}",
            value=len(node.decls), line=self._line(node), node=node,
        )
        self._register(symbol, node)
        self.struct_nodes[node.name] = node

    def _global_decl(self, node: c_ast.Decl) -> None:
        if isinstance(node.type, c_ast.Struct):
            self._struct(node.type)
            return
        if isinstance(node.type, c_ast.Enum):
            raise self.locator.error(UnsupportedConstruct, "enum is not supported", node)
        if isinstance(node.type, c_ast.FuncDecl):
            # prototype; the definition replaces it
            if node.name not in self.globals:
                self._register(
                    Symbol(name=node.name, kind="function", type=describe_type(node.type), line=self._line(node), node=node),
                    node,
                )
            elif self.globals[node.name].kind != "function":
                raise self.locator.error(DuplicateSymbol, f"'{node.name}' is already declared", node)
            return
        if isinstance(node.type, c_ast.TypeDecl) and isinstance(node.type.type, c_ast.Struct):
            self._struct(node.type.type)
        kind = "constant" if "const" in node.quals else "global-var"
        value = None
        if node.init is not None and not isinstance(node.init, c_ast.InitList):
            value = fold_constant(node.init, self.globals, self.locator)
        self._register(
            Symbol(name=node.name, kind=kind, type=describe_type(node.type), value=value, line=self._line(node), node=node),
            node,
        )

    def _function(self, node: c_ast.FuncDef) -> None:
        name = node.decl.name
        previous = self.globals.get(name)
        if previous is not None:
            if previous.kind != "function" or isinstance(previous.node, c_ast.FuncDef):
                raise self.locator.error(DuplicateSymbol, f"'{name}' is already declared", node)
            del self.globals[name]
        symbol = Symbol(name=name, kind="function", type=describe_type(node.decl.type), line=self._line(node), node=node)
        self._register(symbol, node)

        scope = Scope()
        self.scopes = [scope]
        for param in function_params(node.decl.type):
            if isinstance(param, c_ast.Decl) and param.name:
                self._declare(param.name, "param", describe_type(param.type), param)
        for item in node.body.block_items or []:
            self.visit(item)
        self.scopes = []
        symbol.scope = scope

    def _declare(self, name: str, kind: str, type_text: str, node: c_ast.Node) -> None:
        scope = self.scopes[-1]
        if name in scope.symbols:
            raise self.locator.error(DuplicateSymbol, f"'{name}' is already declared in this scope", node)
        scope.symbols[name] = Symbol(name=name, kind=kind, type=type_text, line=self._line(node))

    def _line(self, node: c_ast.Node) -> Optional[int]:
        return self.locator.position(node.coord.line if node.coord else None)[1]

    def _push(self) -> None:
        child = Scope()
        self.scopes[-1].children.append(child)
        self.scopes.append(child)

    def visit_Compound(self, node: c_ast.Compound) -> None:
        self._push()
        for item in node.block_items or []:
            self.visit(item)
        self.scopes.pop()

    def visit_For(self, node: c_ast.For) -> None:
        self._push()
        for child in (node.init, node.cond, node.next, node.stmt):
            if child is not None:
                self.visit(child)
        self.scopes.pop()

    def visit_Decl(self, node: c_ast.Decl) -> None:
        if isinstance(node.type, (c_ast.Struct, c_ast.Enum)) or node.name is None:
            raise self.locator.error(UnsupportedConstruct, "type definitions must be global", node)
        self._declare(node.name, "local", describe_type(node.type), node)
        self.visit(node.type)
        if node.init is not None:
            self.visit(node.init)

    def visit_ID(self, node: c_ast.ID) -> None:
        if self._lookup(node.name) is None:
            raise self.locator.error(UndefinedSymbol, f"'{node.name}' is not declared", node)

    def visit_StructRef(self, node: c_ast.StructRef) -> None:
        self.visit(node.name)

    def visit_FuncCall(self, node: c_ast.FuncCall) -> None:
        if not isinstance(node.name, c_ast.ID):
            raise self.locator.error(UnsupportedConstruct, "indirect calls are not supported", node)
        symbol = self._lookup(node.name.name)
        if symbol is None:
            raise self.locator.error(UndefinedSymbol, f"function '{node.name.name}' is not declared", node)
        if symbol.kind != "function":
            raise self.locator.error(UnsupportedConstruct, f"'{node.name.name}' is not a function", node)
        if node.args is not None:
            self.visit(node.args)

    def _lookup(self, name: str) -> Optional[Symbol]:
        for scope in reversed(self.scopes):
            if name in scope.symbols:
                return scope.symbols[name]
        return self.globals.get(name)


def check_entry(globals_: Dict[str, Symbol], entry: str, locator: Locator) -> None:
    """Entry point must be `void <entry>(struct in_T*, struct out_T*)`."""
    symbol = globals_.get(entry)
    if symbol is None or symbol.kind != "function" or not isinstance(symbol.node, c_ast.FuncDef):
        raise MissingEntryPoint(f"entry function '{entry}' is not defined", path=locator.path)
    decl = symbol.node.decl
    params = function_params(decl.type)
    expected = "void %s(struct in_T*, struct out_T*)" % entry
    if describe_type(decl.type.type) != "void":
        raise locator.error(EntrySignatureMismatch, f"'{entry}' must return void; expected {expected}", decl)
    if len(params) != 2:
        raise locator.error(
            EntrySignatureMismatch, f"'{entry}' takes {len(params)} parameters; expected {expected}", decl
        )
    for param, struct_name in zip(params, ENTRY_STRUCTS):
        if describe_type(param.type) != f"struct {struct_name}*":
            raise locator.error(
                EntrySignatureMismatch,
                f"parameter '{getattr(param, 'name', '?')}' has type {describe_type(param.type)}; expected {expected}",
                param,
            )
        if struct_name not in globals_ or globals_[struct_name].kind != "struct":
            raise locator.error(EntrySignatureMismatch, f"struct {struct_name} is not defined", param)


def build_symbol_table(
    merged: str,
    path: str = "<contract>",
    entry: str = "contract",
    line_map: Optional[List[Tuple[str, int]]] = None,
) -> SymbolTable:
    """Parse a directive-free translation unit and collect its symbols."""
    locator = Locator(path, line_map)
    try:
        ast = c_parser.CParser().parse(merged, filename=path)
    except c_parser.ParseError as exc:
        match = PARSE_LINE_RE.search(str(exc))
        source, line = locator.position(int(match.group(1)) if match else None)
        raise ParseError(f"syntax error: {str(exc).split(': ', 1)[-1]}", path=source, line=line) from exc

    collector = SymbolCollector(locator)
    collector.visit(ast)
    check_entry(collector.globals, entry, locator)
    logger.debug("symbol table for %s: %s", path, sorted(collector.globals))
    return SymbolTable(globals=collector.globals, entry=entry, path=path, ast=ast, line_map=locator.line_map)


# ---------------------------------------------------------------------------
# Symbolic values and storage
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Value:
    """Compile-time constant (`const`) or a named program value."""
    const: Optional[int] = None
    name: Optional[str] = None
    signed: bool = True
    boolean: bool = False

    @property
    def is_const(self) -> bool:
        return self.const is not None

    def retype(self, signed: bool) -> "Value":
        return self if self.signed == signed else replace(self, signed=signed)


class Cell:
    """Scalar storage; `depth` is the branch depth the cell was created at."""

    __slots__ = ("value", "signed", "depth")

    def __init__(self, value: Value, signed: bool, depth: int):
        self.value = value
        self.signed = signed
        self.depth = depth


class Ref:
    """Pointer bound to caller storage."""

    __slots__ = ("target",)

    def __init__(self, target):
        self.target = target


Storage = Union[Cell, Dict[str, "Storage"], List["Storage"], Ref]


class _Return(Exception):
    pass


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


class Frame:
    """Activation of one inlined function."""

    def __init__(self, name: str, ret: Optional[Cell], done: Cell):
        self.name = name
        self.ret = ret
        self.done = done
        self.scopes: List[Dict[str, Storage]] = [{}]
        # branch depth at entry of each enclosing loop
        self.loops: List[int] = []


class NameAllocator:
    """Hands out unique program names."""

    def __init__(self):
        self.taken: Set[str] = set()
        self._counter = 0

    def reserve(self, base: str) -> str:
        name, suffix = base, 1
        while name in self.taken:
            name = f"{base}_{suffix}"
            suffix += 1
        self.taken.add(name)
        return name

    def temp(self) -> str:
        while True:
            name = f"t{self._counter}"
            self._counter += 1
            if name not in self.taken:
                self.taken.add(name)
                return name


def leaf_paths(ctype: CType, prefix: str = "") -> Iterator[Tuple[str, IntType, Tuple]]:
    """Scalar leaves of a struct/array type as (flat name, type, access path)."""
    if isinstance(ctype, IntType):
        yield prefix, ctype, ()
    elif isinstance(ctype, StructType):
        for field_name, field_type in ctype.fields:
            name = f"{prefix}_{field_name}" if prefix else field_name
            for leaf, leaf_type, path in leaf_paths(field_type, name):
                yield leaf, leaf_type, (field_name,) + path
    elif isinstance(ctype, ArrayType):
        for index in range(ctype.length):
            name = f"{prefix}_{index}" if prefix else str(index)
            for leaf, leaf_type, path in leaf_paths(ctype.elem, name):
                yield leaf, leaf_type, (index,) + path


def navigate(storage: Storage, path: Tuple) -> Cell:
    for key in path:
        storage = storage[key]
    return storage


# ---------------------------------------------------------------------------
# Flattener
# ---------------------------------------------------------------------------

class Flattener:
    """
    Symbolic execution of the entry function.

    With `input_values` the inputs are constants, which turns the flattener
    into a reference interpreter of the contract.
    """

    def __init__(
        self,
        table: SymbolTable,
        bit_width: int = BIT_WIDTH,
        max_unroll: int = MAX_UNROLL,
        input_values: Optional[Mapping[str, int]] = None,
    ):
        self.table = table
        self.n = bit_width
        self.max_unroll = max_unroll
        self.input_values = input_values
        self.locator = Locator(table.path, table.line_map)
        self.struct_nodes = {
            name: symbol.node for name, symbol in table.globals.items() if symbol.kind == "struct"
        }
        self.names = NameAllocator()
        # [dest, op, args, signed]
        self.exprs: List[list] = []
        self.consts: Dict[int, str] = {}
        self.temps: Set[str] = set()
        self.journals: List[Dict[Cell, Value]] = []
        self.frames: List[Frame] = []
        self.calls: List[str] = []
        self.globals: Dict[str, Storage] = {}
        self.inputs: List[Port] = []
        self.outputs: List[Tuple[Port, Tuple]] = []

    # -- driver -------------------------------------------------------------

    def run(self) -> FlatProgram:
        entry = self.table.globals[self.table.entry].node
        in_param, out_param = function_params(entry.decl.type)
        in_type = self._type(in_param.type).target
        out_type = self._type(out_param.type).target

        in_storage = self._alloc(in_type)
        for leaf, leaf_type, path in leaf_paths(in_type):
            name = self.names.reserve(leaf)
            self.inputs.append(Port(name=name, signed=leaf_type.signed))
            if self.input_values is None:
                value = Value(name=name, signed=leaf_type.signed)
            else:
                if name not in self.input_values:
                    raise MissingInput(f"missing input '{name}'")
                value = Value(const=encode(self.input_values[name], self.n), signed=leaf_type.signed)
            navigate(in_storage, path).value = value
        for leaf, leaf_type, path in leaf_paths(out_type):
            self.outputs.append((Port(name=self.names.reserve(leaf), signed=leaf_type.signed), path))
        out_storage = self._alloc(out_type)

        self._init_globals()
        self._call(entry, [Ref(in_storage), Ref(out_storage)])

        for port, path in self.outputs:
            source = self._materialize(navigate(out_storage, path).value)
            self.exprs.append([port.name, "MOV", [source], False])

        exprs = self._live_exprs()
        logger.debug("flattened %d expressions, %d live", len(self.exprs), len(exprs))
        return FlatProgram(
            bit_width=self.n,
            inputs=self.inputs,
            outputs=[port for port, _ in self.outputs],
            exprs=[PrimExpr(dest=d, op=op, args=args, signed=signed) for d, op, args, signed in exprs],
        )

    def _live_exprs(self) -> List[list]:
        live = {port.name for port, _ in self.outputs}
        kept = []
        for expr in reversed(self.exprs):
            dest, op, args, _ = expr
            if dest not in live:
                continue
            kept.append(expr)
            if op != "CONST":
                live.update(arg for arg in args if isinstance(arg, str))
        kept.reverse()
        return kept

    def _init_globals(self) -> None:
        self.frames.append(Frame("<globals>", None, Cell(Value(const=0), True, 0)))
        try:
            for name, symbol in self.table.globals.items():
                if symbol.kind not in ("global-var", "constant"):
                    continue
                decl = symbol.node
                ctype = self._type(decl.type)
                storage = self._alloc(ctype)
                if decl.init is not None:
                    self._initialize(storage, ctype, decl.init, name)
                self.globals[name] = storage
        finally:
            self.frames.pop()

    # -- errors and types ---------------------------------------------------

    def _fail(self, cls: Type[FrontendError], message: str, node: Optional[c_ast.Node]) -> FrontendError:
        return self.locator.error(cls, message, node)

    def _dim(self, node: c_ast.Node) -> int:
        value = self._eval(node)
        if not value.is_const:
            raise self._fail(UnsupportedConstruct, "array size must be a compile-time constant", node)
        return value.const

    def _type(self, node: c_ast.Node) -> CType:
        return resolve_type(node, self.struct_nodes, self._dim, self.locator)

    def _alloc(self, ctype: CType) -> Storage:
        depth = len(self.journals)
        if isinstance(ctype, IntType):
            return Cell(Value(const=0, signed=ctype.signed), ctype.signed, depth)
        if isinstance(ctype, StructType):
            return {name: self._alloc(field_type) for name, field_type in ctype.fields}
        if isinstance(ctype, ArrayType):
            return [self._alloc(ctype.elem) for _ in range(ctype.length)]
        raise UnsupportedConstruct(f"cannot allocate storage of type {ctype}", path=self.locator.path)

    def _copy(self, storage: Storage) -> Storage:
        if isinstance(storage, Cell):
            return Cell(storage.value, storage.signed, len(self.journals))
        if isinstance(storage, dict):
            return {key: self._copy(item) for key, item in storage.items()}
        if isinstance(storage, list):
            return [self._copy(item) for item in storage]
        return storage

    # -- emission -----------------------------------------------------------

    def _const(self, value: int, signed: bool = True, boolean: bool = False) -> Value:
        return Value(const=encode(value, self.n), signed=signed, boolean=boolean)

    def _materialize(self, value: Value) -> str:
        if not value.is_const:
            return value.name
        name = self.consts.get(value.const)
        if name is None:
            name = self.names.reserve(f"c{value.const}")
            self.consts[value.const] = name
            self.exprs.append([name, "CONST", [value.const], False])
        return name

    def _emit(self, op: str, args: List, signed: bool, op_signed: bool = False, boolean: bool = False) -> Value:
        name = self.names.temp()
        self.exprs.append([name, op, args, op_signed])
        self.temps.add(name)
        return Value(name=name, signed=signed, boolean=boolean)

    @staticmethod
    def _same(a: Value, b: Value) -> bool:
        if a.is_const or b.is_const:
            return a.const == b.const
        return a.name == b.name

    @staticmethod
    def _is_bool(value: Value) -> bool:
        return value.boolean or value.const in (0, 1)

    def _fold(self, op: str, values: List[int], signed: bool) -> int:
        return apply_op(op, values, self.n, signed)

    def _arith(self, op: str, a: Value, b: Value, signed: bool) -> Value:
        if a.is_const and b.is_const:
            return self._const(self._fold(op, [a.const, b.const], signed), signed)
        if op == "ADD":
            if a.const == 0:
                return b.retype(signed)
            if b.const == 0:
                return a.retype(signed)
        if op == "SUB":
            if b.const == 0:
                return a.retype(signed)
            if self._same(a, b):
                return self._const(0, signed)
        return self._emit(op, [self._materialize(a), self._materialize(b)], signed)

    def _mul(self, a: Value, b: Value, signed: bool) -> Value:
        if a.is_const and b.is_const:
            return self._const(self._fold("MUL", [a.const, b.const], signed), signed)
        if a.is_const:
            a, b = b, a
        if b.is_const:
            if b.const == 0:
                return self._const(0, signed)
            if b.const == 1:
                return a.retype(signed)
            return self._emit("MUL-CONST", [a.name, b.const], signed)
        return self._emit("MUL", [a.name, b.name], signed)

    def _negate(self, a: Value) -> Value:
        return self._mul(a, self._const(mask(self.n)), a.signed)

    def _bitwise(self, op: str, a: Value, b: Value, signed: bool) -> Value:
        boolean = self._is_bool(a) and self._is_bool(b)
        if a.is_const and b.is_const:
            return self._const(self._fold(op, [a.const, b.const], signed), signed, boolean)
        if a.is_const:
            a, b = b, a
        full = mask(self.n)
        if op == "AND":
            if b.const == 0:
                return self._const(0, signed)
            if b.const == full or (b.const == 1 and a.boolean) or self._same(a, b):
                return a.retype(signed)
        if op == "OR":
            if b.const == 0 or self._same(a, b):
                return a.retype(signed)
            if b.const == full or (b.const == 1 and a.boolean):
                return self._const(b.const, signed, b.const == 1)
        if op == "XOR":
            if b.const == 0:
                return a.retype(signed)
            if self._same(a, b):
                return self._const(0, signed)
        return self._emit(op, [self._materialize(a), self._materialize(b)], signed, boolean=boolean)

    def _compare(self, op: str, a: Value, b: Value, signed: bool) -> Value:
        if a.is_const and b.is_const:
            return self._const(self._fold(op, [a.const, b.const], signed), True, True)
        if self._same(a, b):
            return self._const(int(op in ("EQ", "LE", "GE")), True, True)
        op_signed = signed and op not in ("EQ", "NEQ")
        return self._emit(op, [self._materialize(a), self._materialize(b)], True, op_signed, boolean=True)

    def _shift(self, op: str, a: Value, amount: Value, node: c_ast.Node) -> Value:
        if not amount.is_const:
            raise self._fail(UnsupportedConstruct, "shift amount must be a compile-time constant", node)
        k = to_signed(amount.const, self.n) if amount.signed else amount.const
        if k < 0:
            raise self._fail(UnsupportedConstruct, "negative shift amount", node)
        if k == 0:
            return a
        if a.is_const:
            return self._const(self._fold(op, [a.const, k], a.signed), a.signed)
        if op == "SHL-CONST" and k >= self.n:
            return self._const(0, a.signed)
        return self._emit(op, [a.name, k], a.signed, op_signed=op == "SHR-CONST" and a.signed)

    def _divide(self, op: str, a: Value, b: Value, signed: bool, node: c_ast.Node) -> Value:
        if b.is_const and b.const == 0:
            raise self._fail(UnsupportedConstruct, "division by zero", node)
        if a.is_const and b.is_const:
            if signed:
                x, y = to_signed(a.const, self.n), to_signed(b.const, self.n)
            else:
                x, y = a.const, b.const
            quotient = abs(x) // abs(y) * (1 if (x >= 0) == (y >= 0) else -1)
            return self._const(quotient if op == "/" else x - quotient * y, signed)
        if b.is_const and not signed and b.const & (b.const - 1) == 0:
            if op == "/":
                return self._shift("SHR-CONST", a.retype(False), self._const(b.const.bit_length() - 1), node)
            return self._bitwise("AND", a, self._const(b.const - 1, False), False)
        raise self._fail(
            UnsupportedConstruct,
            "division is only supported by constants (unsigned powers of two when the dividend depends on the input)",
            node,
        )

    def _truth(self, value: Value) -> Value:
        if value.boolean:
            return value
        if value.is_const:
            return self._const(int(value.const != 0), True, True)
        return self._compare("NEQ", value, self._const(0), False)

    def _not(self, value: Value) -> Value:
        if value.is_const:
            return self._const(int(value.const == 0), True, True)
        return self._compare("EQ", value, self._const(0), False)

    def _mux(self, cond: Value, a: Value, b: Value, signed: bool) -> Value:
        if cond.is_const:
            return (a if cond.const else b).retype(signed)
        if self._same(a, b):
            return a.retype(signed)
        if a.const == 1 and b.const == 0:
            return cond.retype(signed)
        boolean = self._is_bool(a) and self._is_bool(b)
        args = [cond.name, self._materialize(a), self._materialize(b)]
        return self._emit("MUX", args, signed, boolean=boolean)

    # -- storage writes and branches ----------------------------------------

    def _write(self, cell: Cell, value: Value) -> None:
        if self.journals and cell.depth < len(self.journals):
            journal = self.journals[-1]
            if cell not in journal:
                journal[cell] = cell.value
        if value.name in self.temps:
            self.temps.discard(value.name)
        cell.value = value.retype(cell.signed)

    def _bind_name(self, hint: str, value: Value) -> Value:
        """Rename the expression just emitted for `value` after the variable it is assigned to."""
        if value.name is None or value.name not in self.temps or self.exprs[-1][0] != value.name:
            return value
        name = self.names.reserve(hint)
        self.exprs[-1][0] = name
        self.temps.discard(value.name)
        return replace(value, name=name)

    def _run_branch(self, body: Callable[[], Optional[Value]]) -> Tuple[Optional[Value], Dict[Cell, Tuple[Value, Value]]]:
        """Run `body` speculatively; return its result and the (old, new) value of every written cell."""
        self.journals.append({})
        result = None
        try:
            result = body()
        except _Return:
            pass
        finally:
            journal = self.journals.pop()
        writes = {}
        for cell, old in journal.items():
            writes[cell] = (old, cell.value)
            cell.value = old
        return result, writes

    def _merge(self, cond: Value, then_writes: Dict, else_writes: Dict) -> None:
        cells = list(then_writes) + [cell for cell in else_writes if cell not in then_writes]
        for cell in cells:
            old = (then_writes.get(cell) or else_writes[cell])[0]
            a = then_writes[cell][1] if cell in then_writes else old
            b = else_writes[cell][1] if cell in else_writes else old
            self._write(cell, self._mux(cond, a, b, cell.signed))

    def _guarded(self, rest: Callable[[], None]) -> None:
        """Run the rest of a block only where the function has not returned yet."""
        frame = self.frames[-1]
        cond = self._not(frame.done.value)

        def body() -> None:
            self._write(frame.done, self._const(0, True, True))
            rest()

        _, writes = self._run_branch(body)
        if frame.done in writes and writes[frame.done][1].const == 0:
            del writes[frame.done]
        self._merge(cond, writes, {})

    # -- functions ----------------------------------------------------------

    def _call(self, fdef: c_ast.FuncDef, args: List) -> Optional[Value]:
        name = fdef.decl.name
        if name in self.calls:
            raise self._fail(UnsupportedConstruct, f"recursive call of '{name}'", fdef)
        ret_type = self._type(fdef.decl.type.type)
        depth = len(self.journals)
        ret = Cell(self._const(0, ret_type.signed), ret_type.signed, depth) if isinstance(ret_type, IntType) else None
        frame = Frame(name, ret, Cell(self._const(0, True, True), True, depth))
        params = function_params(fdef.decl.type)
        for param, arg in zip(params, args):
            ptype = self._type(param.type)
            if isinstance(ptype, IntType):
                frame.scopes[0][param.name] = Cell(arg.retype(ptype.signed), ptype.signed, depth)
            elif isinstance(ptype, StructType):
                frame.scopes[0][param.name] = self._copy(arg)
            else:
                frame.scopes[0][param.name] = arg

        self.frames.append(frame)
        self.calls.append(name)
        try:
            self._exec_block(fdef.body.block_items or [])
        except _Return:
            pass
        finally:
            self.frames.pop()
            self.calls.pop()
        return ret.value if ret is not None else None

    def _call_expr(self, node: c_ast.FuncCall) -> Value:
        name = node.name.name
        symbol = self.table.globals.get(name)
        if symbol is None or symbol.kind != "function":
            raise self._fail(UndefinedSymbol, f"function '{name}' is not declared", node)
        if not isinstance(symbol.node, c_ast.FuncDef):
            raise self._fail(UnsupportedConstruct, f"function '{name}' has no body", node)
        params = function_params(symbol.node.decl.type)
        arg_nodes = list(node.args.exprs) if node.args is not None else []
        if len(arg_nodes) != len(params):
            raise self._fail(
                UnsupportedConstruct, f"'{name}' takes {len(params)} arguments, {len(arg_nodes)} given", node
            )
        args = [self._argument(arg, self._type(param.type)) for arg, param in zip(arg_nodes, params)]
        result = self._call(symbol.node, args)
        return result if result is not None else self._const(0)

    def _argument(self, node: c_ast.Node, ptype: CType):
        if isinstance(ptype, IntType):
            return self._eval(node)
        if isinstance(ptype, StructType):
            storage = self._storage(node)
            if not isinstance(storage, dict):
                raise self._fail(UnsupportedConstruct, f"argument must be a struct {ptype.name}", node)
            return storage
        if isinstance(node, c_ast.UnaryOp) and node.op == "&":
            return Ref(self._storage(node.expr))
        storage = self._storage(node)
        if isinstance(storage, Ref):
            return storage
        if isinstance(storage, list):
            return Ref(storage)
        raise self._fail(UnsupportedConstruct, "pointer arguments must be &lvalue, a pointer or an array", node)

    # -- statements ---------------------------------------------------------

    def _exec(self, node: Optional[c_ast.Node]) -> None:
        if node is None:
            return
        handler = getattr(self, f"_stmt_{type(node).__name__}", None)
        if handler is not None:
            handler(node)
        else:
            self._eval(node)

    def _exec_block(self, items: List[c_ast.Node]) -> None:
        frame = self.frames[-1]
        for index, item in enumerate(items):
            self._exec(item)
            done = frame.done.value
            if done.is_const:
                if done.const:
                    raise _Return()
                continue
            rest = items[index + 1:]
            if rest:
                self._guarded(lambda: self._exec_block(rest))
            return

    def _stmt_Compound(self, node: c_ast.Compound) -> None:
        frame = self.frames[-1]
        frame.scopes.append({})
        try:
            self._exec_block(node.block_items or [])
        finally:
            frame.scopes.pop()

    def _stmt_EmptyStatement(self, node: c_ast.EmptyStatement) -> None:
        pass

    def _stmt_DeclList(self, node: c_ast.DeclList) -> None:
        for decl in node.decls:
            self._stmt_Decl(decl)

    def _stmt_Decl(self, node: c_ast.Decl) -> None:
        if isinstance(node.type, c_ast.FuncDecl):
            raise self._fail(UnsupportedConstruct, "nested function declarations are not supported", node)
        ctype = self._type(node.type)
        if isinstance(ctype, PointerType):
            if node.init is None:
                raise self._fail(UnsupportedConstruct, "pointers must be initialized", node)
            storage = self._argument(node.init, ctype)
        else:
            storage = self._alloc(ctype)
            if node.init is not None:
                self._initialize(storage, ctype, node.init, node.name)
        self.frames[-1].scopes[-1][node.name] = storage

    def _initialize(self, storage: Storage, ctype: CType, init: c_ast.Node, hint: str) -> None:
        if isinstance(ctype, IntType):
            self._write(storage, self._bind_name(hint, self._eval(init)))
            return
        if isinstance(init, c_ast.InitList):
            if isinstance(ctype, ArrayType):
                elements = [(index, ctype.elem) for index in range(ctype.length)]
            else:
                elements = list(ctype.fields)
            if len(init.exprs) > len(elements):
                raise self._fail(UnsupportedConstruct, "too many initializers", init)
            for (key, elem_type), expr in zip(elements, init.exprs):
                self._initialize(storage[key], elem_type, expr, f"{hint}_{key}")
            return
        source = self._storage(init)
        self._copy_into(storage, source, init)

    def _copy_into(self, target: Storage, source: Storage, node: c_ast.Node) -> None:
        if isinstance(target, Cell) and isinstance(source, Cell):
            self._write(target, source.value)
        elif isinstance(target, dict) and isinstance(source, dict) and target.keys() == source.keys():
            for key in target:
                self._copy_into(target[key], source[key], node)
        elif isinstance(target, list) and isinstance(source, list) and len(target) == len(source):
            for t, s in zip(target, source):
                self._copy_into(t, s, node)
        else:
            raise self._fail(UnsupportedConstruct, "incompatible assignment", node)

    def _stmt_If(self, node: c_ast.If) -> None:
        cond = self._truth(self._eval(node.cond))
        if cond.is_const:
            self._exec(node.iftrue if cond.const else node.iffalse)
            return
        _, then_writes = self._run_branch(lambda: self._exec(node.iftrue))
        else_writes = {}
        if node.iffalse is not None:
            _, else_writes = self._run_branch(lambda: self._exec(node.iffalse))
        self._merge(cond, then_writes, else_writes)

    def _stmt_Return(self, node: c_ast.Return) -> None:
        frame = self.frames[-1]
        if node.expr is not None:
            value = self._eval(node.expr)
            if frame.ret is None:
                raise self._fail(UnsupportedConstruct, f"void function '{frame.name}' returns a value", node)
            self._write(frame.ret, value)
        self._write(frame.done, self._const(1, True, True))
        raise _Return()

    def _loop_control(self, node: c_ast.Node, exc: Type[Exception]) -> None:
        frame = self.frames[-1]
        keyword = "break" if exc is _Break else "continue"
        if not frame.loops:
            raise self._fail(UnsupportedConstruct, f"'{keyword}' outside a loop", node)
        if len(self.journals) > frame.loops[-1]:
            raise self._fail(UnsupportedConstruct, f"'{keyword}' under an input-dependent condition", node)
        raise exc()

    def _stmt_Break(self, node: c_ast.Break) -> None:
        self._loop_control(node, _Break)

    def _stmt_Continue(self, node: c_ast.Continue) -> None:
        self._loop_control(node, _Continue)

    def _stmt_For(self, node: c_ast.For) -> None:
        frame = self.frames[-1]
        frame.scopes.append({})
        try:
            self._exec(node.init)
            self._loop(node, node.cond, node.stmt, node.next, 0, True)
        finally:
            frame.scopes.pop()

    def _stmt_While(self, node: c_ast.While) -> None:
        self._loop(node, node.cond, node.stmt, None, 0, True)

    def _stmt_DoWhile(self, node: c_ast.DoWhile) -> None:
        self._loop(node, node.cond, node.stmt, None, 0, False)

    def _loop(self, node, cond, body, step, count: int, check: bool) -> None:
        """Unroll a loop whose condition is known at compile time on every iteration."""
        frame = self.frames[-1]
        while True:
            if check and cond is not None:
                test = self._truth(self._eval(cond))
                if not test.is_const:
                    raise self._fail(UnboundedLoop, "loop condition depends on the input", node)
                if not test.const:
                    return
            check = True
            count += 1
            if count > self.max_unroll:
                raise self._fail(UnboundedLoop, f"loop exceeds {self.max_unroll} iterations", node)
            frame.loops.append(len(self.journals))
            try:
                self._exec(body)
            except _Break:
                return
            except _Continue:
                pass
            finally:
                frame.loops.pop()

            done = frame.done.value
            if done.is_const and done.const:
                raise _Return()
            if not done.is_const:
                def rest(iterations=count):
                    if step is not None:
                        self._eval(step)
                    self._loop(node, cond, body, step, iterations, True)

                self._guarded(rest)
                return
            if step is not None:
                self._eval(step)

    def _stmt_Switch(self, node: c_ast.Node) -> None:
        raise self._fail(UnsupportedConstruct, "switch is not supported", node)

    def _stmt_Goto(self, node: c_ast.Node) -> None:
        raise self._fail(UnsupportedConstruct, "goto is not supported", node)

    # -- expressions --------------------------------------------------------

    def _lookup(self, name: str, node: c_ast.Node) -> Storage:
        for scope in reversed(self.frames[-1].scopes):
            if name in scope:
                return scope[name]
        if name in self.globals:
            return self.globals[name]
        raise self._fail(UndefinedSymbol, f"'{name}' is not declared", node)

    def _storage(self, node: c_ast.Node) -> Storage:
        if isinstance(node, c_ast.ID):
            return self._lookup(node.name, node)
        if isinstance(node, c_ast.StructRef):
            base = self._storage(node.name)
            if node.type == "->":
                base = self._deref(base, node)
            if not isinstance(base, dict):
                raise self._fail(UnsupportedConstruct, "member access on a non-struct value", node)
            if node.field.name not in base:
                raise self._fail(UndefinedSymbol, f"no field '{node.field.name}'", node)
            return base[node.field.name]
        if isinstance(node, c_ast.ArrayRef):
            base = self._storage(node.name)
            if isinstance(base, Ref):
                base = base.target
            if not isinstance(base, list):
                raise self._fail(UnsupportedConstruct, "subscript of a non-array value", node)
            index = self._eval(node.subscript)
            if not index.is_const:
                raise self._fail(DynamicIndex, "array index depends on the input", node)
            position = to_signed(index.const, self.n) if index.signed else index.const
            if not 0 <= position < len(base):
                raise self._fail(UnsupportedConstruct, f"index {position} outside array of {len(base)}", node)
            return base[position]
        if isinstance(node, c_ast.UnaryOp) and node.op == "*":
            return self._deref(self._storage(node.expr), node)
        raise self._fail(UnsupportedConstruct, "expression is not addressable", node)

    def _deref(self, storage: Storage, node: c_ast.Node) -> Storage:
        if not isinstance(storage, Ref):
            raise self._fail(DynamicIndex, "dereference of a non-pointer value", node)
        return storage.target

    def _scalar(self, node: c_ast.Node) -> Cell:
        storage = self._storage(node)
        if not isinstance(storage, Cell):
            raise self._fail(UnsupportedConstruct, "scalar value expected", node)
        return storage

    def _assign(self, lvalue: c_ast.Node, cell: Cell, value: Value) -> Value:
        if isinstance(lvalue, c_ast.ID):
            value = self._bind_name(lvalue.name, value)
        self._write(cell, value)
        return cell.value

    def _eval(self, node: c_ast.Node) -> Value:
        if isinstance(node, c_ast.Constant):
            value, unsigned = parse_literal(node, self.locator)
            signed = not unsigned and value < 2 ** (self.n - 1)
            return self._const(value, signed)
        if isinstance(node, (c_ast.ID, c_ast.StructRef, c_ast.ArrayRef)):
            return self._scalar(node).value
        if isinstance(node, c_ast.UnaryOp):
            return self._unary(node)
        if isinstance(node, c_ast.BinaryOp):
            return self._binary(node)
        if isinstance(node, c_ast.Assignment):
            return self._assignment(node)
        if isinstance(node, c_ast.TernaryOp):
            return self._ternary(node)
        if isinstance(node, c_ast.Cast):
            ctype = self._type(node.to_type)
            if not isinstance(ctype, IntType):
                raise self._fail(UnsupportedConstruct, f"cast to {ctype}", node)
            return self._eval(node.expr).retype(ctype.signed)
        if isinstance(node, c_ast.FuncCall):
            return self._call_expr(node)
        if isinstance(node, c_ast.ExprList):
            values = [self._eval(expr) for expr in node.exprs]
            return values[-1]
        raise self._fail(UnsupportedConstruct, f"unsupported construct {type(node).__name__}", node)

    def _unary(self, node: c_ast.UnaryOp) -> Value:
        op = node.op
        if op in ("++", "--", "p++", "p--"):
            cell = self._scalar(node.expr)
            old = cell.value
            one = self._const(1, old.signed)
            new = self._arith("ADD" if "+" in op else "SUB", old, one, old.signed)
            new = self._assign(node.expr, cell, new)
            return new if op in ("++", "--") else old
        if op == "*":
            return self._scalar(node).value
        if op == "sizeof" or op == "&":
            raise self._fail(UnsupportedConstruct, f"operator '{op}' is not supported here", node)
        value = self._eval(node.expr)
        if op == "+":
            return value
        if op == "-":
            return self._negate(value)
        if op == "~":
            if value.is_const:
                return self._const(self._fold("NOT", [value.const], value.signed), value.signed)
            return self._emit("NOT", [value.name], value.signed)
        if op == "!":
            return self._not(value)
        raise self._fail(UnsupportedConstruct, f"unary operator '{op}'", node)

    def _binary(self, node: c_ast.BinaryOp) -> Value:
        op = node.op
        if op in ("&&", "||"):
            left = self._truth(self._eval(node.left))
            if left.is_const:
                if bool(left.const) == (op == "||"):
                    return left
                return self._truth(self._eval(node.right))
            right = self._truth(self._eval(node.right))
            return self._bitwise("AND" if op == "&&" else "OR", left, right, True)
        return self._apply(op, self._eval(node.left), self._eval(node.right), node)

    def _apply(self, op: str, a: Value, b: Value, node: c_ast.Node) -> Value:
        signed = a.signed and b.signed
        comparisons = {"<": "LT", ">": "GT", "<=": "LE", ">=": "GE", "==": "EQ", "!=": "NEQ"}
        if op in comparisons:
            return self._compare(comparisons[op], a, b, signed)
        if op == "+":
            return self._arith("ADD", a, b, signed)
        if op == "-":
            return self._arith("SUB", a, b, signed)
        if op == "*":
            return self._mul(a, b, signed)
        if op in ("/", "%"):
            return self._divide(op, a, b, signed, node)
        if op in ("<<", ">>"):
            return self._shift("SHL-CONST" if op == "<<" else "SHR-CONST", a, b, node)
        if op in ("&", "|", "^"):
            return self._bitwise({"&": "AND", "|": "OR", "^": "XOR"}[op], a, b, signed)
        raise self._fail(UnsupportedConstruct, f"operator '{op}' is not supported", node)

    def _assignment(self, node: c_ast.Assignment) -> Value:
        target = self._storage(node.lvalue)
        if isinstance(target, Ref):
            raise self._fail(UnsupportedConstruct, "pointer assignment is not supported", node)
        if node.op == "=":
            if not isinstance(target, Cell):
                self._copy_into(target, self._storage(node.rvalue), node)
                return self._const(0)
            value = self._eval(node.rvalue)
        else:
            if not isinstance(target, Cell):
                raise self._fail(UnsupportedConstruct, "compound assignment to an aggregate", node)
            value = self._apply(node.op[:-1], target.value, self._eval(node.rvalue), node)
        return self._assign(node.lvalue, target, value)

    def _ternary(self, node: c_ast.TernaryOp) -> Value:
        cond = self._truth(self._eval(node.cond))
        if cond.is_const:
            return self._eval(node.iftrue if cond.const else node.iffalse)
        a, then_writes = self._run_branch(lambda: self._eval(node.iftrue))
        b, else_writes = self._run_branch(lambda: self._eval(node.iffalse))
        self._merge(cond, then_writes, else_writes)
        return self._mux(cond, a, b, a.signed and b.signed)


def flatten(table: SymbolTable, bit_width: int = BIT_WIDTH, max_unroll: int = MAX_UNROLL) -> FlatProgram:
    """Inline, unroll and fold the entry function into a straight-line program."""
    prog = Flattener(table, bit_width, max_unroll).run()
    check_program(prog, table.path)
    logger.info(
        "flattened %s: %d inputs, %d outputs, %d expressions",
        table.entry, len(prog.inputs), len(prog.outputs), len(prog.exprs),
    )
    return prog


def execute_contract(
    table: SymbolTable,
    inputs: Mapping[str, int],
    bit_width: int = BIT_WIDTH,
    max_unroll: int = MAX_UNROLL,
) -> Dict[str, int]:
    """Reference execution of the contract with concrete inputs; output patterns by name."""
    prog = Flattener(table, bit_width, max_unroll, input_values=inputs).run()
    return interpret(prog, {port.name: inputs[port.name] for port in prog.inputs})


def compile_source(
    unit: SourceUnit,
    defines: Optional[Dict[str, str]] = None,
    bit_width: int = BIT_WIDTH,
    max_unroll: int = MAX_UNROLL,
) -> Tuple[SymbolTable, FlatProgram]:
    """Preprocess, build the symbol table and flatten in one go."""
    preprocessor = Preprocessor(unit, defines)
    merged = preprocessor.run()
    table = build_symbol_table(merged, unit.files[0][0], unit.entry_name, preprocessor.line_map)
    return table, flatten(table, bit_width, max_unroll)
