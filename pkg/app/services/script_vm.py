"""
Stack machine for locking/unlocking scripts.

Execution is strictly linear; there are no branch opcodes. A failing script
returns ExecutionResult(ok=False) with the reason instead of raising.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List

from app.models.chain import ExecutionResult, Script
from app.services.backend import get_backend
from app.services.chain import decode_number, hash160, is_p2sh, is_push_only, parse_script
from app.services.crypto import parse_proof, parse_vk, verify
from app.services.errors import (
    ChainError,
    CryptoError,
    DeserializeError,
    HashMismatch,
    ParseError,
    StackUnderflow,
    ValueOutOfRange,
)


logger = logging.getLogger(__name__)

TRUE = b"\x01"
FALSE = b""


def truthy(item: bytes) -> bool:
    return any(item)


@dataclass
class ScriptContext:
    """What the node knows about the input being validated."""
    signer: bytes = b""


@dataclass
class Machine:
    ctx: ScriptContext
    stack: List[bytes] = field(default_factory=list)
    alt: List[bytes] = field(default_factory=list)

    def pop(self) -> bytes:
        if not self.stack:
            raise StackUnderflow("pop from an empty stack")
        return self.stack.pop()

    def run(self, script: Script) -> None:
        for item in script.items:
            if item.is_push:
                self.stack.append(item.data)
            else:
                getattr(self, "_" + item.op.lower())()

    def _op_dup(self) -> None:
        top = self.pop()
        self.stack += [top, top]

    def _op_hash160(self) -> None:
        self.stack.append(hash160(self.pop()))

    def _op_equal(self) -> None:
        b, a = self.pop(), self.pop()
        self.stack.append(TRUE if a == b else FALSE)

    def _op_equalverify(self) -> None:
        b, a = self.pop(), self.pop()
        if a != b:
            raise HashMismatch(f"OP_EQUALVERIFY failed: {a.hex()} != {b.hex()}")

    def _op_verify(self) -> None:
        if not truthy(self.pop()):
            raise ChainError("OP_VERIFY failed")

    def _op_toaltstack(self) -> None:
        self.alt.append(self.pop())

    def _op_fromaltstack(self) -> None:
        if not self.alt:
            raise StackUnderflow("pop from an empty alt stack")
        self.stack.append(self.alt.pop())

    def _op_checksig(self) -> None:
        # mock signature: the pushed key must be the input's signer
        self.stack.append(TRUE if self.pop() == self.ctx.signer else FALSE)

    def _op_verify_poc(self) -> None:
        n = decode_number(self.pop())
        chunks = [self.pop() for _ in range(n)][::-1]
        try:
            vk = parse_vk(b"".join(chunks).decode("ascii"), path="<stack>")
        except (UnicodeDecodeError, ParseError, CryptoError) as exc:
            raise DeserializeError(f"verification key on the stack is unreadable: {exc}") from exc
        y = [self.pop() for _ in range(vk.n_out)][::-1]
        x = [self.pop() for _ in range(vk.n_in)][::-1]
        proof_bytes = self.pop()
        backend = get_backend(vk.backend, vk.modulus)
        try:
            proof = parse_proof(proof_bytes.decode("ascii"), backend)
            accepted = verify(vk, [int.from_bytes(v, "big") for v in x + y], proof, backend)
        except (UnicodeDecodeError, CryptoError, ValueOutOfRange) as exc:
            # IO pushes wider than the key's bit width reject the spend
            logger.info("OP_VERIFY_POC rejected the proof: %s", exc)
            accepted = False
        self.stack.append(TRUE if accepted else FALSE)


def execute(unlocking: Script, locking: Script, ctx: ScriptContext = None) -> ExecutionResult:
    """Run unlocking then locking; P2SH locks go on to run the pushed redeem script."""
    ctx = ctx or ScriptContext()
    if not is_push_only(unlocking):
        return ExecutionResult(ok=False, reason="unlocking script is not push-only")
    try:
        machine = Machine(ctx)
        machine.run(unlocking)
        saved = list(machine.stack)
        machine.run(locking)
        if not machine.stack or not truthy(machine.stack[-1]):
            return ExecutionResult(ok=False, reason="locking script left a false result")
        if is_p2sh(locking):
            redeem = parse_script(saved.pop())
            machine = Machine(ctx, stack=saved)
            machine.run(redeem)
            if not machine.stack or not truthy(machine.stack[-1]):
                return ExecutionResult(ok=False, reason="redeem script left a false result")
    except ChainError as exc:
        logger.info("script failed: %s", exc)
        return ExecutionResult(ok=False, reason=str(exc))
    return ExecutionResult(ok=True)
