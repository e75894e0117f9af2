"""
Command-line entry point.

Sub-commands hand stage files to each other:

    compile -> minimize -> setup -> prove -> verify -> script -> run-chain

`all` chains every stage for one contract and an inputs file. Generated files
go to the working directory (ZKC_WORKDIR, `.zkc` by default) unless an
explicit output path is given.

Exit codes: 0 success/accept, 1 verification reject, 2 usage or input error,
3 internal error.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from app.models.chain import TxBundle
from app.models.config import PipelineConfig
from app.services import pipeline
from app.services.backend import mock_backend
from app.services.circuit_format import parse_circuit, serialize_circuit
from app.services.config import load_config, parse_defines
from app.services.crypto import parse_ek, parse_proof, parse_vk, serialize_ek, serialize_proof, serialize_vk
from app.services.errors import ToolkitError
from app.services.minimizer import format_report
from app.services.program_format import serialize_program
from app.services.qap import serialize_qap
from app.storage.artifacts import ArtifactStore, artifact_store


logger = logging.getLogger("app")

EXIT_OK = 0
EXIT_REJECT = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3

CONFIG_FLAGS = ("bit_width", "field_modulus", "max_unroll", "cores", "strategy",
                "max_push", "max_script", "rng_seed", "max_logic_inputs")


def _read(path: Path, what: str) -> str:
    if not path.exists():
        raise ToolkitError(f"{what} not found", path=str(path))
    return path.read_text(encoding="utf-8")


def _write(store: ArtifactStore, explicit: Optional[Path], default: str, text: str) -> Path:
    """Explicit paths are taken as given; defaults live in the working directory."""
    if explicit is None:
        return store.write_text(default, text)
    explicit.parent.mkdir(parents=True, exist_ok=True)
    explicit.write_text(text, encoding="utf-8")
    return explicit


def _config(args: argparse.Namespace) -> PipelineConfig:
    overrides: Dict[str, Any] = {name: getattr(args, name, None) for name in CONFIG_FLAGS}
    if getattr(args, "define", None):
        overrides["defines"] = parse_defines(",".join(args.define))
    return load_config(args.config, overrides)


def _store(args: argparse.Namespace) -> ArtifactStore:
    return ArtifactStore(args.workdir) if args.workdir else artifact_store


def _read_values(path: Path, what: str) -> List[int]:
    return pipeline.read_values(_read(path, what), str(path))


# -- stages -----------------------------------------------------------------

def compile_cmd(args: argparse.Namespace) -> int:
    cfg = _config(args)
    unit = pipeline.load_sources(args.sources, args.entry)
    prog, circuit = pipeline.compile_contract(unit, cfg)
    target = _write(_store(args), args.output, "circuit.txt", serialize_circuit(circuit))
    if args.program:
        _write(_store(args), args.program, "program.txt", serialize_program(prog))
    print(f"circuit: {len(circuit.gates)} gates, {circuit.num_wires} wires, "
          f"{circuit.num_mul_gates} multiplications -> {target}")
    return EXIT_OK


def minimize_cmd(args: argparse.Namespace) -> int:
    cfg = _config(args)
    circuit = parse_circuit(_read(args.circuit, "circuit file"), str(args.circuit))
    minimized, report = pipeline.minimize_circuit(circuit, cfg)
    store = _store(args)
    target = _write(store, args.output, "minimized.txt", serialize_circuit(minimized))
    report_path = args.report or (target.with_name(target.name + ".report") if args.output else None)
    _write(store, report_path, "minimized.txt.report", format_report(report))
    print(f"minimized: {report.gates_before} -> {report.gates_after} gates "
          f"({len(report.submodules)} submodules, {cfg.cores} cores, {cfg.strategy}) -> {target}")
    return EXIT_OK


def setup_cmd(args: argparse.Namespace) -> int:
    cfg = _config(args)
    circuit = parse_circuit(_read(args.circuit, "circuit file"), str(args.circuit))
    qap, ek, vk = pipeline.setup(circuit, cfg)
    store = _store(args)
    ek_path = _write(store, args.ek, "ek.txt", serialize_ek(ek))
    vk_path = _write(store, args.vk, "vk.txt", serialize_vk(vk))
    if args.qap:
        _write(store, args.qap, "qap.txt", serialize_qap(qap))
    print(f"setup: {qap.k} variables, degree {qap.d} -> {ek_path}, {vk_path}")
    return EXIT_OK


def prove_cmd(args: argparse.Namespace) -> int:
    circuit = parse_circuit(_read(args.circuit, "circuit file"), str(args.circuit))
    ek = parse_ek(_read(args.ek, "evaluation key"), str(args.ek))
    values = _read_values(args.inputs, "inputs file")
    proof, outputs = pipeline.run_prover(circuit, ek, values, perturb=args.perturb_witness)
    store = _store(args)
    proof_path = _write(store, args.proof, "proof.txt", serialize_proof(proof, mock_backend(ek.modulus)))
    outputs_path = _write(store, args.outputs, "outputs.txt", pipeline.format_values(outputs))
    print(f"outputs: {' '.join(str(v) for v in outputs)} -> {outputs_path}; proof -> {proof_path}")
    return EXIT_OK


def verify_cmd(args: argparse.Namespace) -> int:
    vk = parse_vk(_read(args.vk, "verification key"), str(args.vk))
    x = _read_values(args.inputs, "inputs file")
    y = _read_values(args.outputs, "outputs file")
    try:
        proof = parse_proof(_read(args.proof, "proof file"), mock_backend(vk.modulus), str(args.proof))
        accepted = pipeline.run_verifier(vk, x, y, proof)
    except ToolkitError as exc:
        logger.info("rejecting: %s", exc)
        accepted = False
    print("Proof is valid" if accepted else "Proof is invalid")
    return EXIT_OK if accepted else EXIT_REJECT


def script_cmd(args: argparse.Namespace) -> int:
    cfg = _config(args)
    vk = parse_vk(_read(args.vk, "verification key"), str(args.vk))
    proof = parse_proof(_read(args.proof, "proof file"), mock_backend(vk.modulus), str(args.proof))
    x = _read_values(args.inputs, "inputs file")
    y = _read_values(args.outputs, "outputs file")
    bundle = pipeline.build_bundle(vk, proof, x, y, cfg, args.contract_amount, args.payment)
    target = _write(_store(args), args.output, "bundle.json", bundle.model_dump_json(indent=2))
    print(f"bundle for key {bundle.key_id} -> {target}")
    return EXIT_OK


def run_chain_cmd(args: argparse.Namespace) -> int:
    bundle = TxBundle.model_validate_json(_read(args.bundle, "bundle file"))
    result = pipeline.replay_bundle(bundle)
    print("accepted" if result.ok else f"rejected: {result.reason}")
    return EXIT_OK if result.ok else EXIT_REJECT


def all_cmd(args: argparse.Namespace) -> int:
    """Every stage for one contract; files land in the working directory."""
    cfg = _config(args)
    store = _store(args)
    unit = pipeline.load_sources(args.sources, args.entry)
    _, circuit = pipeline.compile_contract(unit, cfg)
    store.write_text("circuit.txt", serialize_circuit(circuit))
    minimized, report = pipeline.minimize_circuit(circuit, cfg)
    store.write_text("minimized.txt", serialize_circuit(minimized))
    store.write_text("minimized.txt.report", format_report(report))
    print(f"[setup] {report.gates_before} -> {report.gates_after} gates")

    qap, ek, vk = pipeline.setup(minimized, cfg)
    store.write_text("ek.txt", serialize_ek(ek))
    store.write_text("vk.txt", serialize_vk(vk))
    print(f"[setup] QAP with {qap.k} variables, degree {qap.d}")

    x = _read_values(args.inputs, "inputs file")
    proof, y = pipeline.run_prover(minimized, ek, x, qap)
    store.write_text("proof.txt", serialize_proof(proof, mock_backend(ek.modulus)))
    store.write_text("outputs.txt", pipeline.format_values(y))
    print(f"[evaluation] outputs {' '.join(str(v) for v in y)}")

    if not pipeline.run_verifier(vk, x, y, proof):
        print("[validation] proof rejected")
        return EXIT_REJECT
    bundle = pipeline.build_bundle(vk, proof, x, y, cfg)
    store.write_text("bundle.json", bundle.model_dump_json(indent=2))
    result = pipeline.replay_bundle(bundle)
    print("[validation] " + ("spending transaction accepted" if result.ok else f"rejected: {result.reason}"))
    return EXIT_OK if result.ok else EXIT_REJECT


# -- parser -----------------------------------------------------------------

def _positive(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return value


def _config_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("pipeline configuration")
    group.add_argument("--bit-width", "--bitwidth", dest="bit_width", type=int)
    group.add_argument("--field-modulus", type=int)
    group.add_argument("--max-unroll", type=int)
    group.add_argument("--cores", type=int)
    group.add_argument("--strategy", choices=["lpt", "round-robin"])
    group.add_argument("--max-push", type=int)
    group.add_argument("--max-script", type=int)
    group.add_argument("--rng-seed", type=int)
    group.add_argument("--max-logic-inputs", type=int)
    group.add_argument("-D", "--define", action="append", metavar="NAME[=VALUE]")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zkc", description="Verifiable smart-contract toolkit")
    parser.add_argument("--config", type=Path, help="key=value configuration file")
    parser.add_argument("--log-level", default=os.getenv("ZKC_LOG_LEVEL", "WARNING"))
    parser.add_argument("--workdir", type=Path, help="directory for generated files")
    subparsers = parser.add_subparsers(dest="command", required=True)
    cfg = _config_parent()

    p = subparsers.add_parser("compile", parents=[cfg], help="contract source -> circuit")
    p.add_argument("sources", type=Path, nargs="+")
    p.add_argument("--entry", default="contract")
    p.add_argument("-o", "--output", type=Path)
    p.add_argument("--program", type=Path, help="also write the flat program")
    p.set_defaults(func=compile_cmd)

    p = subparsers.add_parser("minimize", parents=[cfg], help="minimize logic submodules")
    p.add_argument("circuit", type=Path)
    p.add_argument("-o", "--output", type=Path)
    p.add_argument("--report", type=Path)
    p.set_defaults(func=minimize_cmd)

    p = subparsers.add_parser("setup", parents=[cfg], help="circuit -> evaluation and verification keys")
    p.add_argument("circuit", type=Path)
    p.add_argument("--ek", type=Path)
    p.add_argument("--vk", type=Path)
    p.add_argument("--qap", type=Path, help="also write the QAP")
    p.set_defaults(func=setup_cmd)

    p = subparsers.add_parser("prove", help="evaluate the circuit and prove the result")
    p.add_argument("circuit", type=Path)
    p.add_argument("ek", type=Path)
    p.add_argument("inputs", type=Path)
    p.add_argument("--proof", type=Path)
    p.add_argument("--outputs", type=Path)
    p.add_argument("--perturb-witness", type=int, metavar="INDEX", help=argparse.SUPPRESS)
    p.set_defaults(func=prove_cmd)

    p = subparsers.add_parser("verify", help="check a proof against the verification key")
    p.add_argument("vk", type=Path)
    p.add_argument("inputs", type=Path)
    p.add_argument("outputs", type=Path)
    p.add_argument("proof", type=Path)
    p.set_defaults(func=verify_cmd)

    p = subparsers.add_parser("script", parents=[cfg], help="build the funding and spending transactions")
    p.add_argument("vk", type=Path)
    p.add_argument("proof", type=Path)
    p.add_argument("inputs", type=Path)
    p.add_argument("outputs", type=Path)
    p.add_argument("-o", "--output", type=Path)
    p.add_argument("--contract-amount", type=_positive, default=pipeline.CONTRACT_AMOUNT)
    p.add_argument("--payment", type=_positive, default=pipeline.PAYMENT)
    p.set_defaults(func=script_cmd)

    p = subparsers.add_parser("run-chain", help="replay a transaction bundle on a fresh ledger")
    p.add_argument("bundle", type=Path)
    p.set_defaults(func=run_chain_cmd)

    p = subparsers.add_parser("all", parents=[cfg], help="run every stage for one contract")
    p.add_argument("sources", type=Path, nargs="+")
    p.add_argument("--inputs", type=Path, required=True)
    p.add_argument("--entry", default="contract")
    p.set_defaults(func=all_cmd)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:  # pylint: disable=broad-exception-caught
        logger.exception("internal error in '%s'", args.command)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
