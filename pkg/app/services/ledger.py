"""
In-memory UTXO set.
"""

import logging
from typing import Dict, List, Tuple

from app.models.chain import GenesisCoin, Transaction, TxOut
from app.services.chain import GENESIS_TXID, build_p2pkh_lock, hash160
from app.services.errors import LedgerError
from app.services.script_vm import ScriptContext, execute


logger = logging.getLogger(__name__)

Outpoint = Tuple[str, int]


class UtxoLedger:
    """Single writer; `apply` validates scripts and amounts before touching the set."""

    def __init__(self):
        self.utxos: Dict[Outpoint, TxOut] = {}
        self._minted = 0

    def mint(self, owner_pubkey: bytes, amount: int) -> GenesisCoin:
        """Create a P2PKH coin out of thin air (genesis txid, running index)."""
        if amount <= 0:
            raise LedgerError("minted amount must be positive")
        coin = GenesisCoin(txid=GENESIS_TXID, index=self._minted, amount=amount, owner_pubkey=owner_pubkey.hex())
        self.utxos[(coin.txid, coin.index)] = TxOut(amount=amount, locking=build_p2pkh_lock(hash160(owner_pubkey)))
        self._minted += 1
        return coin

    def restore(self, coins: List[GenesisCoin]) -> None:
        for coin in coins:
            self.utxos[(coin.txid, coin.index)] = TxOut(
                amount=coin.amount, locking=build_p2pkh_lock(hash160(bytes.fromhex(coin.owner_pubkey)))
            )
            self._minted = max(self._minted, coin.index + 1)

    def apply(self, tx: Transaction) -> str:
        """Validate and apply a transaction; returns its txid."""
        spent: List[Outpoint] = []
        total_in = 0
        for position, tx_in in enumerate(tx.inputs):
            outpoint = (tx_in.prev_txid, tx_in.prev_index)
            if outpoint not in self.utxos:
                raise LedgerError(f"input {position} spends unknown or spent output {outpoint[0]}:{outpoint[1]}")
            if outpoint in spent:
                raise LedgerError(f"input {position} spends {outpoint[0]}:{outpoint[1]} twice")
            previous = self.utxos[outpoint]
            result = execute(tx_in.unlocking, previous.locking, ScriptContext(signer=tx_in.signer))
            if not result.ok:
                raise LedgerError(f"input {position} script failed: {result.reason}")
            spent.append(outpoint)
            total_in += previous.amount
        total_out = sum(out.amount for out in tx.outputs)
        if total_out > total_in:
            raise LedgerError(f"outputs ({total_out}) exceed inputs ({total_in})")
        txid = tx.txid
        for outpoint in spent:
            del self.utxos[outpoint]
        for index, out in enumerate(tx.outputs):
            self.utxos[(txid, index)] = out
        logger.info("applied tx %s: %d in, %d out, fee %d", txid, len(tx.inputs), len(tx.outputs), total_in - total_out)
        return txid

    def balance(self, pubkey: bytes) -> int:
        """Sum of P2PKH outputs payable to pubkey."""
        lock = build_p2pkh_lock(hash160(pubkey))
        return sum(out.amount for out in self.utxos.values() if out.locking == lock)
