"""
Script and transaction models for the miniature UTXO chain.
"""

from typing import List, Optional

from pydantic import BaseModel


SIGHASH_SINGLE_ANYONECANPAY = 0x83


class ScriptItem(BaseModel):
    """Either an opcode name or a data push."""
    op: Optional[str] = None
    data: Optional[bytes] = None

    @property
    def is_push(self) -> bool:
        return self.op is None


class Script(BaseModel):
    items: List[ScriptItem] = []


class VKChunks(BaseModel):
    """Verification key split into pushable blocks plus their HASH160 digests."""
    chunks: List[bytes]
    hashes: List[bytes]


class TxIn(BaseModel):
    prev_txid: str
    prev_index: int
    unlocking: Script
    sighash: int = SIGHASH_SINGLE_ANYONECANPAY
    # mock signature: pubkey of the party that signed this input
    signer: bytes = b""


class TxOut(BaseModel):
    amount: int
    locking: Script


class Transaction(BaseModel):
    version: int = 1
    inputs: List[TxIn]
    outputs: List[TxOut]

    @property
    def txid(self) -> str:
        # imported here: the codec lives with the chain service
        from app.services.chain import transaction_id

        return transaction_id(self)


class GenesisCoin(BaseModel):
    """Coin minted into a fresh ledger before the funding transaction."""
    txid: str
    index: int
    amount: int
    owner_pubkey: str


class TxBundle(BaseModel):
    """Everything a validating node needs to replay the contract spend."""
    key_id: str
    modulus: int
    max_push: int
    max_script: int
    genesis: List[GenesisCoin]
    funding_hex: str
    spending_hex: str
    payee_pubkey: str
    worker_pubkey: str


class FundingPlan(BaseModel):
    """Size check done by the client before funding a contract."""
    chunks: int
    redeem_bytes: int
    data_bytes: int
    max_script: int

    @property
    def fits(self) -> bool:
        return self.data_bytes <= self.max_script


class ExecutionResult(BaseModel):
    ok: bool
    reason: Optional[str] = None
