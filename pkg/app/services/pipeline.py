"""
Stage functions shared by the command line and the demo script.

Each stage takes models (or text) and returns models; reading and writing
stage files is left to the caller so the stages compose without hidden state.
"""

import logging
import random
import re
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from app.models.chain import ExecutionResult, TxBundle
from app.models.circuit import Circuit
from app.models.config import PipelineConfig
from app.models.crypto import EvaluationKey, Proof, VerificationKey
from app.models.minimizer import MinimizationReport
from app.models.program import FlatProgram, SourceUnit
from app.models.qap import QAP
from app.services import chain
from app.services.backend import mock_backend
from app.services.circuit import evaluate, lower, output_values, signed_io_positions
from app.services.crypto import keygen, normalize_io, prove, serialize_proof, serialize_vk, verify
from app.services.errors import ChainError, InvalidWitness, ToolkitError
from app.services.frontend import compile_source
from app.services.ledger import UtxoLedger
from app.services.minimizer import minimize_with_report
from app.services.qap import build_qap, witness
from app.services.semantics import io_patterns


logger = logging.getLogger(__name__)

INCLUDE_RE = re.compile(r'^\s*#\s*include\s+"([^"]+)"', re.MULTILINE)

# amounts used when a bundle is built without explicit values
CLIENT_COIN = chain.ONE_BTC
CONTRACT_AMOUNT = chain.ONE_BTC
PAYMENT = chain.ONE_BTC // 2


def load_sources(paths: Sequence[Union[str, Path]], entry: str = "contract") -> SourceUnit:
    """
    Read contract files; quoted includes found next to them are pulled in too.

    The first path is the file that gets compiled.
    """
    if not paths:
        raise ToolkitError("no contract source given")
    files: Dict[str, str] = {}
    pending = [Path(p) for p in paths]
    while pending:
        path = pending.pop(0)
        key = path.as_posix()
        if key in files:
            continue
        if not path.exists():
            raise ToolkitError("source file not found", path=key)
        text = path.read_text(encoding="utf-8")
        files[key] = text
        for target in INCLUDE_RE.findall(text):
            candidate = path.parent / target
            if candidate.exists():
                pending.append(candidate)
    return SourceUnit(files=list(files.items()), entry_name=entry)


def compile_contract(unit: SourceUnit, cfg: PipelineConfig) -> Tuple[FlatProgram, Circuit]:
    _, prog = compile_source(unit, cfg.defines, cfg.bit_width, cfg.max_unroll)
    circuit = lower(prog, cfg.field_modulus)
    logger.info(
        "compiled %s: %d gates, %d wires, %d multiplications",
        unit.files[0][0], len(circuit.gates), circuit.num_wires, circuit.num_mul_gates,
    )
    return prog, circuit


def minimize_circuit(circuit: Circuit, cfg: PipelineConfig) -> Tuple[Circuit, MinimizationReport]:
    return minimize_with_report(circuit, cfg.cores, cfg.strategy, cfg.max_logic_inputs)


def make_rng(cfg: PipelineConfig) -> random.Random:
    """Seeded generator when rng_seed is set, OS entropy otherwise."""
    if cfg.rng_seed is None:
        return random.SystemRandom()
    return random.Random(cfg.rng_seed)


def setup(circuit: Circuit, cfg: PipelineConfig) -> Tuple[QAP, EvaluationKey, VerificationKey]:
    """Client-side setup: QAP plus the public parameters."""
    qap = build_qap(circuit)
    ek, vk, _ = keygen(qap, mock_backend(circuit.field_modulus), make_rng(cfg))
    logger.info("setup done: key id %s", chain.key_id(vk))
    return qap, ek, vk


def read_values(text: str, path: str = "<values>") -> List[int]:
    """One decimal per line; blank lines and `#` comments are skipped."""
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(int(line))
        except ValueError as exc:
            raise ToolkitError(f"'{line}' is not a decimal value", path=path, line=lineno) from exc
    return values


def format_values(values: Sequence[int]) -> str:
    return "".join(f"{value}\n" for value in values)


def input_assignment(circuit: Circuit, values: Sequence[int]) -> Dict[int, int]:
    """Map values to input wires in declared order; negative values of signed inputs are encoded."""
    if len(values) > len(circuit.input_wires):
        raise ToolkitError(f"expected {len(circuit.input_wires)} input values, got {len(values)}")
    patterns = io_patterns(values, circuit.bit_width, signed_io_positions(circuit))
    return dict(zip(circuit.input_wires, patterns))


def run_prover(circuit: Circuit, ek: EvaluationKey, values: Sequence[int], qap: Optional[QAP] = None,
               perturb: Optional[int] = None) -> Tuple[Proof, List[int]]:
    """
    Worker side: evaluate, build the witness and prove.

    `perturb` adds one to the given witness coordinate before proving (used
    to exercise the invalid-witness path).
    """
    qap = qap or build_qap(circuit)
    assignment = evaluate(circuit, input_assignment(circuit, values))
    a = witness(circuit, assignment, qap)
    if perturb is not None:
        if not 0 <= perturb < qap.k:
            raise InvalidWitness(f"witness has no coordinate {perturb}")
        a.a[perturb] = (a.a[perturb] + 1) % qap.field_modulus
    proof = prove(ek, qap, a, mock_backend(ek.modulus))
    return proof, output_values(circuit, assignment)


def run_verifier(vk: VerificationKey, x: Sequence[int], y: Sequence[int], proof: Proof) -> bool:
    if len(x) != vk.n_in or len(y) != vk.n_out:
        logger.info("IO shape (%d, %d) does not match the key (%d, %d)", len(x), len(y), vk.n_in, vk.n_out)
        return False
    return verify(vk, list(x) + list(y), proof, mock_backend(vk.modulus))


def build_bundle(vk: VerificationKey, proof: Proof, x: Sequence[int], y: Sequence[int],
                 cfg: PipelineConfig, contract_amount: int = CONTRACT_AMOUNT,
                 payment: int = PAYMENT) -> TxBundle:
    """
    Client funds the contract, worker spends it with the proof.

    A fresh ledger is minted with two client coins; the bundle records them so
    a validating node can replay both transactions.
    """
    backend = mock_backend(vk.modulus)
    client, payee, worker = (chain.mock_pubkey(owner) for owner in ("client", "payee", "worker"))
    vk_bytes = serialize_vk(vk).encode("ascii")
    plan = chain.plan_funding(vk_bytes, cfg.max_push, cfg.max_script, worker)
    logger.info("VK of %d bytes in %d chunks; carried data %d bytes", len(vk_bytes), plan.chunks, plan.data_bytes)

    chunks = chain.chunk_vk(vk_bytes, cfg.max_push)
    redeem = chain.build_redeem_script(chunks, worker, cfg.max_push, cfg.max_script)
    ledger = UtxoLedger()
    coins = [ledger.mint(client, CLIENT_COIN) for _ in range(2)]
    funding = chain.build_funding_tx(
        chain.build_locking_script(redeem), payment, chain.hash160(payee),
        [(coin.txid, coin.index, client) for coin in coins], contract_amount,
    )
    io = normalize_io(vk, list(x) + list(y))
    unlocking = chain.build_unlocking_script(
        serialize_proof(proof, backend).encode("ascii"), io[:vk.n_in], io[vk.n_in:], chunks, redeem,
        vk.modulus, cfg.max_push, cfg.max_script,
    )
    spending = chain.build_spending_tx(funding, unlocking, worker)
    return TxBundle(
        key_id=chain.key_id(vk),
        modulus=vk.modulus,
        max_push=cfg.max_push,
        max_script=cfg.max_script,
        genesis=coins,
        funding_hex=chain.serialize_tx(funding).hex(),
        spending_hex=chain.serialize_tx(spending).hex(),
        payee_pubkey=payee.hex(),
        worker_pubkey=worker.hex(),
    )


def replay_bundle(bundle: TxBundle, ledger: Optional[UtxoLedger] = None) -> ExecutionResult:
    """Any node: restore the genesis coins, apply funding then spending."""
    ledger = ledger or UtxoLedger()
    ledger.restore(bundle.genesis)
    try:
        funding = chain.parse_tx(bytes.fromhex(bundle.funding_hex))
        spending = chain.parse_tx(bytes.fromhex(bundle.spending_hex))
        ledger.apply(funding)
        ledger.apply(spending)
    except (ChainError, ValueError) as exc:
        logger.info("bundle %s rejected: %s", bundle.key_id, exc)
        return ExecutionResult(ok=False, reason=str(exc))
    logger.info("bundle %s accepted; worker balance %d", bundle.key_id,
                ledger.balance(bytes.fromhex(bundle.worker_pubkey)))
    return ExecutionResult(ok=True)
