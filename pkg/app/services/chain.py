"""
Scripts and transactions of the miniature UTXO chain.

Byte layouts follow Bitcoin where one exists (opcode values, push encoding,
HASH160); transactions use a simplified length-prefixed little-endian layout.
"""

from __future__ import annotations

import logging
from io import BytesIO
from typing import Iterable, List, Optional, Sequence, Tuple

from Crypto.Hash import RIPEMD160, SHA256

from app.models.chain import (
    SIGHASH_SINGLE_ANYONECANPAY,
    FundingPlan,
    Script,
    ScriptItem,
    Transaction,
    TxIn,
    TxOut,
    VKChunks,
)
from app.models.config import MAX_PUSH, MAX_SCRIPT
from app.models.crypto import VerificationKey
from app.services.errors import DeserializeError, PushTooLarge, ScriptTooLarge


logger = logging.getLogger(__name__)

OPCODES = {
    "OP_VERIFY": 0x69,
    "OP_TOALTSTACK": 0x6B,
    "OP_FROMALTSTACK": 0x6C,
    "OP_DUP": 0x76,
    "OP_EQUAL": 0x87,
    "OP_EQUALVERIFY": 0x88,
    "OP_HASH160": 0xA9,
    "OP_CHECKSIG": 0xAC,
    "OP_VERIFY_POC": 0xB9,
}
OPCODE_NAMES = {value: name for name, value in OPCODES.items()}
OP_PUSHDATA1 = 0x4C
OP_PUSHDATA2 = 0x4D

ONE_BTC = 100_000_000
GENESIS_TXID = "00" * 20


def hash160(data: bytes) -> bytes:
    """RIPEMD-160 of SHA-256."""
    return RIPEMD160.new(SHA256.new(data).digest()).digest()


def mock_pubkey(owner: str) -> bytes:
    """Deterministic 33-byte compressed-style public key for a named party."""
    return b"\x02" + SHA256.new(owner.encode()).digest()


def key_id(vk: VerificationKey) -> str:
    from app.services.crypto import serialize_vk

    return hash160(serialize_vk(vk).encode()).hex()


# -- scripts ----------------------------------------------------------------

def op(name: str) -> ScriptItem:
    if name not in OPCODES:
        raise DeserializeError(f"unknown opcode {name}")
    return ScriptItem(op=name)


def push(data: bytes) -> ScriptItem:
    return ScriptItem(data=bytes(data))


def encode_number(n: int) -> bytes:
    """Minimal little-endian encoding of a non-negative script number."""
    if n == 0:
        return b""
    raw = n.to_bytes((n.bit_length() + 7) // 8, "little")
    return raw + b"\x00" if raw[-1] & 0x80 else raw


def decode_number(data: bytes) -> int:
    return int.from_bytes(data, "little") if data else 0


def serialize_script(script: Script) -> bytes:
    out = bytearray()
    for item in script.items:
        if not item.is_push:
            out.append(OPCODES[item.op])
            continue
        size = len(item.data)
        if size <= 75:
            out.append(size)
        elif size <= 0xFF:
            out += bytes([OP_PUSHDATA1, size])
        elif size <= 0xFFFF:
            out.append(OP_PUSHDATA2)
            out += size.to_bytes(2, "little")
        else:
            raise PushTooLarge(f"push of {size} bytes cannot be encoded")
        out += item.data
    return bytes(out)


def parse_script(raw: bytes) -> Script:
    items: List[ScriptItem] = []
    pos = 0
    while pos < len(raw):
        code = raw[pos]
        pos += 1
        if code <= 75:
            size = code
        elif code == OP_PUSHDATA1:
            if pos >= len(raw):
                raise DeserializeError("truncated PUSHDATA1")
            size = raw[pos]
            pos += 1
        elif code == OP_PUSHDATA2:
            if pos + 2 > len(raw):
                raise DeserializeError("truncated PUSHDATA2")
            size = int.from_bytes(raw[pos:pos + 2], "little")
            pos += 2
        elif code in OPCODE_NAMES:
            items.append(ScriptItem(op=OPCODE_NAMES[code]))
            continue
        else:
            raise DeserializeError(f"unknown opcode 0x{code:02x} at byte {pos - 1}")
        if pos + size > len(raw):
            raise DeserializeError(f"push of {size} bytes runs past the end of the script")
        items.append(ScriptItem(data=raw[pos:pos + size]))
        pos += size
    return Script(items=items)


def script_text(script: Script) -> str:
    """One item per line: `PUSH <hex>` or the opcode name."""
    return "\n".join(f"PUSH {item.data.hex()}" if item.is_push else item.op for item in script.items) + "\n"


def parse_script_text(text: str) -> Script:
    items = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("PUSH"):
            items.append(push(bytes.fromhex(line[4:].strip())))
        else:
            items.append(op(line))
    return Script(items=items)


def check_limits(script: Script, max_push: int = MAX_PUSH, max_script: int = MAX_SCRIPT) -> Script:
    for item in script.items:
        if item.is_push and len(item.data) > max_push:
            raise PushTooLarge(f"push of {len(item.data)} bytes exceeds max_push {max_push}")
    size = len(serialize_script(script))
    if size > max_script:
        raise ScriptTooLarge(f"script of {size} bytes exceeds max_script {max_script}")
    return script


def is_push_only(script: Script) -> bool:
    return all(item.is_push for item in script.items)


# -- contract scripts -------------------------------------------------------

def chunk_vk(vk_bytes: bytes, max_push: int = MAX_PUSH) -> VKChunks:
    """Greedy split into max_push blocks (the last one may be shorter)."""
    if max_push < 1:
        raise ValueError("max_push must be positive")
    chunks = [vk_bytes[i:i + max_push] for i in range(0, len(vk_bytes), max_push)]
    return VKChunks(chunks=chunks, hashes=[hash160(chunk) for chunk in chunks])


def build_redeem_script(chunks: VKChunks, worker_pubkey: bytes, max_push: int = MAX_PUSH,
                        max_script: int = MAX_SCRIPT) -> Script:
    """
    Check every VK chunk against its hash (last chunk first), park it on the
    alt stack, restore the chunks, require the worker's signature, then verify
    the proof.
    """
    n = len(chunks.hashes)
    if n == 0:
        raise ScriptTooLarge("redeem script needs at least one VK chunk")
    items: List[ScriptItem] = []
    for digest in reversed(chunks.hashes):
        items += [op("OP_DUP"), op("OP_HASH160"), push(digest), op("OP_EQUALVERIFY"), op("OP_TOALTSTACK")]
    items += [op("OP_FROMALTSTACK")] * n
    items += [push(worker_pubkey), op("OP_CHECKSIG"), op("OP_VERIFY")]
    items += [push(encode_number(n)), op("OP_VERIFY_POC")]
    return check_limits(Script(items=items), max_push, max_script)


def build_locking_script(redeem: Script) -> Script:
    """P2SH: OP_HASH160 <H(redeem)> OP_EQUAL."""
    return Script(items=[op("OP_HASH160"), push(hash160(serialize_script(redeem))), op("OP_EQUAL")])


def is_p2sh(script: Script) -> bool:
    items = script.items
    return (
        len(items) == 3
        and items[0].op == "OP_HASH160"
        and items[1].is_push and len(items[1].data) == 20
        and items[2].op == "OP_EQUAL"
    )


def build_p2pkh_lock(pubkey_hash: bytes) -> Script:
    return Script(items=[
        op("OP_DUP"), op("OP_HASH160"), push(pubkey_hash), op("OP_EQUALVERIFY"), op("OP_CHECKSIG"),
    ])


def build_p2pkh_unlock(pubkey: bytes) -> Script:
    return Script(items=[push(pubkey)])


def field_bytes(modulus: int) -> int:
    return (modulus.bit_length() + 7) // 8


def encode_io(values: Iterable[int], modulus: int) -> List[bytes]:
    width = field_bytes(modulus)
    return [(value % modulus).to_bytes(width, "big") for value in values]


def build_unlocking_script(proof_bytes: bytes, io_x: Sequence[int], io_y: Sequence[int], chunks: VKChunks,
                           redeem: Script, modulus: int, max_push: int = MAX_PUSH,
                           max_script: int = MAX_SCRIPT) -> Script:
    """<proof> x.. y.. <VK_1>..<VK_n> <redeem>, push-only."""
    items = [push(proof_bytes)]
    items += [push(value) for value in encode_io(io_x, modulus)]
    items += [push(value) for value in encode_io(io_y, modulus)]
    items += [push(chunk) for chunk in chunks.chunks]
    items.append(push(serialize_script(redeem)))
    return check_limits(Script(items=items), max_push, max_script)


def plan_funding(vk_bytes: bytes, max_push: int = MAX_PUSH, max_script: int = MAX_SCRIPT,
                 worker_pubkey: Optional[bytes] = None) -> FundingPlan:
    """Chunk count and the data the contract's unlocking script will carry besides proof and IO."""
    chunks = chunk_vk(vk_bytes, max_push)
    redeem = build_redeem_script(chunks, worker_pubkey or mock_pubkey("worker"), max_push, max_script=1 << 32)
    carried = Script(items=[push(chunk) for chunk in chunks.chunks] + [push(serialize_script(redeem))])
    return FundingPlan(
        chunks=len(chunks.chunks),
        redeem_bytes=len(serialize_script(redeem)),
        data_bytes=len(serialize_script(carried)),
        max_script=max_script,
    )


# -- transactions -----------------------------------------------------------

def _write_bytes(stream: BytesIO, data: bytes) -> None:
    stream.write(len(data).to_bytes(4, "little"))
    stream.write(data)


def serialize_tx(tx: Transaction) -> bytes:
    stream = BytesIO()
    stream.write(tx.version.to_bytes(4, "little"))
    stream.write(len(tx.inputs).to_bytes(4, "little"))
    for tx_in in tx.inputs:
        stream.write(bytes.fromhex(tx_in.prev_txid))
        stream.write(tx_in.prev_index.to_bytes(4, "little"))
        _write_bytes(stream, serialize_script(tx_in.unlocking))
        stream.write(bytes([tx_in.sighash]))
        _write_bytes(stream, tx_in.signer)
    stream.write(len(tx.outputs).to_bytes(4, "little"))
    for tx_out in tx.outputs:
        stream.write(tx_out.amount.to_bytes(8, "little"))
        _write_bytes(stream, serialize_script(tx_out.locking))
    return stream.getvalue()


class _Reader:
    def __init__(self, raw: bytes):
        self.raw = raw
        self.pos = 0

    def take(self, size: int) -> bytes:
        if self.pos + size > len(self.raw):
            raise DeserializeError(f"transaction truncated at byte {self.pos}")
        data = self.raw[self.pos:self.pos + size]
        self.pos += size
        return data

    def uint(self, size: int) -> int:
        return int.from_bytes(self.take(size), "little")

    def blob(self) -> bytes:
        return self.take(self.uint(4))


def parse_tx(raw: bytes) -> Transaction:
    reader = _Reader(raw)
    version = reader.uint(4)
    inputs = []
    for _ in range(reader.uint(4)):
        inputs.append(TxIn(
            prev_txid=reader.take(20).hex(),
            prev_index=reader.uint(4),
            unlocking=parse_script(reader.blob()),
            sighash=reader.uint(1),
            signer=reader.blob(),
        ))
    outputs = []
    for _ in range(reader.uint(4)):
        outputs.append(TxOut(amount=reader.uint(8), locking=parse_script(reader.blob())))
    if reader.pos != len(raw):
        raise DeserializeError(f"{len(raw) - reader.pos} trailing bytes after transaction")
    return Transaction(version=version, inputs=inputs, outputs=outputs)


def transaction_id(tx: Transaction) -> str:
    return hash160(serialize_tx(tx)).hex()


def build_funding_tx(contract_lock: Script, payment: int, payee_pubkey_hash: bytes,
                     inputs: Sequence[Tuple[str, int, bytes]], contract_amount: int) -> Transaction:
    """
    Two client coins in; the contract P2SH output and the P2PKH payment out.

    `inputs` holds (txid, index, signer pubkey) for P2PKH coins of the client.
    """
    if payment <= 0 or contract_amount <= 0:
        raise ValueError("amounts must be positive")
    if len(inputs) != 2:
        raise ValueError(f"funding transaction takes two inputs, got {len(inputs)}")
    tx = Transaction(
        inputs=[
            TxIn(prev_txid=txid, prev_index=index, unlocking=build_p2pkh_unlock(pubkey),
                 sighash=SIGHASH_SINGLE_ANYONECANPAY, signer=pubkey)
            for txid, index, pubkey in inputs
        ],
        outputs=[
            TxOut(amount=contract_amount, locking=contract_lock),
            TxOut(amount=payment, locking=build_p2pkh_lock(payee_pubkey_hash)),
        ],
    )
    logger.info("funding tx %s: contract %d, payment %d", tx.txid, contract_amount, payment)
    return tx


def build_spending_tx(funding: Transaction, unlocking: Script, worker_pubkey: bytes,
                      amount: Optional[int] = None) -> Transaction:
    """Spend funding output 0 to the worker."""
    amount = funding.outputs[0].amount if amount is None else amount
    return Transaction(
        inputs=[TxIn(prev_txid=funding.txid, prev_index=0, unlocking=unlocking, signer=worker_pubkey)],
        outputs=[TxOut(amount=amount, locking=build_p2pkh_lock(hash160(worker_pubkey)))],
    )
