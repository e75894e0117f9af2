"""
End-to-end demo of the three phases on the example contracts.

- setup (client): compile, minimize, generate keys, fund the contract;
- evaluation (worker): evaluate the circuit, prove, build the spend;
- validation (any node): replay both transactions on a fresh ledger.

Run from the repository root:  python scripts/run_demo.py
"""

import logging
import os
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from app.services import pipeline  # noqa: E402
from app.services.config import load_config  # noqa: E402
from app.services.minimizer import format_report  # noqa: E402

CONTRACTS = Path("contracts")

DEMOS = [
    # (source, inputs file, bit width)
    ("adder.c", "inputs-adder.txt", 16),
    ("salary.c", "inputs-salary.txt", 24),
]


def run(source: str, inputs: str, bit_width: int) -> bool:
    print(f"\n=== {source} (bit width {bit_width}) ===")
    cfg = load_config(overrides={"bit_width": bit_width, "rng_seed": int(os.getenv("ZKC_RNG_SEED", "7"))})

    print("[setup] compiling contract...")
    unit = pipeline.load_sources([CONTRACTS / source])
    prog, circuit = pipeline.compile_contract(unit, cfg)
    print(f"[setup] {len(prog.exprs)} expressions -> {len(circuit.gates)} gates, "
          f"{circuit.num_mul_gates} multiplications")

    minimized, report = pipeline.minimize_circuit(circuit, cfg)
    print("[setup] " + format_report(report).replace("\n", "\n[setup] "))

    qap, ek, vk = pipeline.setup(minimized, cfg)
    print(f"[setup] QAP: {qap.k} variables, degree {qap.d}; keys generated")

    print("[evaluation] worker evaluates and proves...")
    x = pipeline.read_values((CONTRACTS / inputs).read_text(encoding="utf-8"), inputs)
    proof, y = pipeline.run_prover(minimized, ek, x, qap)
    print(f"[evaluation] inputs {x} -> outputs {y}")

    bundle = pipeline.build_bundle(vk, proof, x, y, cfg)
    print(f"[evaluation] funding and spending transactions built (key {bundle.key_id})")

    print("[validation] node replays the transactions...")
    result = pipeline.replay_bundle(bundle)
    print("[validation] " + ("payment released" if result.ok else f"rejected: {result.reason}"))
    return result.ok


def main() -> int:
    logging.basicConfig(level=os.getenv("ZKC_LOG_LEVEL", "WARNING"))
    ok = all([run(*demo) for demo in DEMOS])
    print("\nDone." if ok else "\nDemo failed.")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
