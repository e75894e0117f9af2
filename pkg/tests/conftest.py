"""
Shared fixtures for the test suite.
"""

import os
import sys
from pathlib import Path

import pytest

# Ensure project root is in the Python path when running from any directory
CURRENT_DIR = os.path.dirname(__file__)
PROJECT_ROOT = os.path.dirname(CURRENT_DIR)
if PROJECT_ROOT not in sys.path:
    sys.path.append(PROJECT_ROOT)

from app.models.config import MERSENNE_61  # noqa: E402

CONTRACTS_DIR = Path(PROJECT_ROOT) / "contracts"

ADDER = (CONTRACTS_DIR / "adder.c").read_text(encoding="utf-8")


@pytest.fixture
def contracts_dir() -> Path:
    return CONTRACTS_DIR


@pytest.fixture
def adder_circuit():
    from app.models.program import FlatProgram, Port, PrimExpr
    from app.services.circuit import lower

    prog = FlatProgram(
        bit_width=16,
        inputs=[Port(name="i1"), Port(name="i2")],
        outputs=[Port(name="o")],
        exprs=[PrimExpr(dest="val", op="ADD", args=["i1", "i2"]), PrimExpr(dest="o", op="MOV", args=["val"])],
    )
    return lower(prog, MERSENNE_61)
