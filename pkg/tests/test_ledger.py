"""
Unit tests for the in-memory UTXO ledger.
"""

import pytest

from app.models.chain import Transaction, TxIn, TxOut
from app.services import chain
from app.services.errors import LedgerError
from app.services.ledger import UtxoLedger


ALICE = chain.mock_pubkey("alice")
BOB = chain.mock_pubkey("bob")


def pay(coin, amount, to=BOB, signer=ALICE):
    return Transaction(
        inputs=[TxIn(prev_txid=coin.txid, prev_index=coin.index,
                     unlocking=chain.build_p2pkh_unlock(signer), signer=signer)],
        outputs=[TxOut(amount=amount, locking=chain.build_p2pkh_lock(chain.hash160(to)))],
    )


@pytest.fixture
def ledger():
    return UtxoLedger()


def test_mint_and_spend(ledger):
    """Unit test: a P2PKH coin moves to the payee; the difference is the fee."""
    coin = ledger.mint(ALICE, 1000)

    txid = ledger.apply(pay(coin, 900))

    assert ledger.balance(ALICE) == 0
    assert ledger.balance(BOB) == 900
    assert (txid, 0) in ledger.utxos


def test_double_spend(ledger):
    """Unit test: a spent output cannot be spent again."""
    coin = ledger.mint(ALICE, 1000)
    ledger.apply(pay(coin, 1000))

    with pytest.raises(LedgerError):
        ledger.apply(pay(coin, 500))


def test_same_output_twice_in_one_transaction(ledger):
    """Unit test: duplicate inputs are refused and the set is untouched."""
    coin = ledger.mint(ALICE, 1000)
    tx = pay(coin, 1500)
    tx.inputs.append(tx.inputs[0])

    with pytest.raises(LedgerError, match="twice"):
        ledger.apply(tx)
    assert ledger.balance(ALICE) == 1000


def test_unknown_input(ledger):
    """Unit test: spending an output that never existed fails."""
    coin = ledger.mint(ALICE, 1000)

    with pytest.raises(LedgerError, match="unknown"):
        ledger.apply(pay(coin.model_copy(update={"index": 7}), 10))


def test_outputs_exceed_inputs(ledger):
    """Unit test: value cannot be created by a transaction."""
    coin = ledger.mint(ALICE, 1000)

    with pytest.raises(LedgerError, match="exceed"):
        ledger.apply(pay(coin, 1001))
    assert ledger.balance(ALICE) == 1000


def test_failing_script(ledger):
    """Unit test: a coin signed by the wrong party is not spendable."""
    coin = ledger.mint(ALICE, 1000)

    with pytest.raises(LedgerError, match="script failed"):
        ledger.apply(pay(coin, 10, signer=BOB))


def test_mint_checks_amount(ledger):
    """Unit test: minting nothing is an error."""
    with pytest.raises(LedgerError):
        ledger.mint(ALICE, 0)


def test_restore_genesis_coins(ledger):
    """Unit test: coins recorded by one ledger can be restored in another."""
    coins = [ledger.mint(ALICE, 10), ledger.mint(BOB, 20)]
    other = UtxoLedger()
    other.restore(coins)

    assert other.balance(ALICE) == 10 and other.balance(BOB) == 20
    assert other.mint(ALICE, 5).index == 2
