"""
Tests for the command-line interface: stage files, exit codes and messages.
"""

import json

import pytest

from app.main import EXIT_INTERNAL, EXIT_OK, EXIT_REJECT, EXIT_USAGE, main
from app.storage.artifacts import ArtifactStore

from conftest import CONTRACTS_DIR


ADDER_C = str(CONTRACTS_DIR / "adder.c")


@pytest.fixture
def workdir(tmp_path):
    inputs = tmp_path / "inputs.txt"
    inputs.write_text("2\n3\n", encoding="utf-8")
    return tmp_path


def zkc(workdir, *args):
    return main(["--workdir", str(workdir / "out"), *args])


def test_all_adder(workdir, capsys):
    """Unit test: every stage runs and the spending transaction is accepted."""
    code = zkc(workdir, "all", ADDER_C, "--inputs", str(workdir / "inputs.txt"),
               "--bit-width", "16", "--rng-seed", "3")

    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert "[setup]" in out and "[evaluation] outputs 5" in out
    assert "spending transaction accepted" in out
    for name in ("circuit.txt", "minimized.txt", "ek.txt", "vk.txt", "proof.txt", "outputs.txt", "bundle.json"):
        assert (workdir / "out" / name).exists(), name


def test_stage_by_stage(workdir, capsys):
    """Unit test: each stage reads the files the previous one wrote."""
    w = workdir
    assert zkc(w, "compile", ADDER_C, "--bitwidth", "16", "-o", str(w / "c.txt"),
               "--program", str(w / "p.txt")) == EXIT_OK
    assert (w / "p.txt").read_text(encoding="utf-8").startswith("bitwidth 16")
    assert zkc(w, "minimize", str(w / "c.txt"), "-o", str(w / "m.txt")) == EXIT_OK
    assert (w / "m.txt.report").exists()
    assert zkc(w, "setup", str(w / "m.txt"), "--ek", str(w / "ek"), "--vk", str(w / "vk"),
               "--qap", str(w / "qap"), "--rng-seed", "1") == EXIT_OK
    assert zkc(w, "prove", str(w / "m.txt"), str(w / "ek"), str(w / "inputs.txt"),
               "--proof", str(w / "proof"), "--outputs", str(w / "outputs")) == EXIT_OK
    assert (w / "outputs").read_text(encoding="utf-8") == "5\n"

    capsys.readouterr()
    assert zkc(w, "verify", str(w / "vk"), str(w / "inputs.txt"), str(w / "outputs"), str(w / "proof")) == EXIT_OK
    assert capsys.readouterr().out.strip() == "Proof is valid"

    assert zkc(w, "script", str(w / "vk"), str(w / "proof"), str(w / "inputs.txt"), str(w / "outputs"),
               "-o", str(w / "bundle.json")) == EXIT_OK
    assert json.loads((w / "bundle.json").read_text(encoding="utf-8"))["max_script"] == 1461
    assert zkc(w, "run-chain", str(w / "bundle.json")) == EXIT_OK


def test_verify_rejects_wrong_output(workdir, capsys):
    """Unit test: a wrong claimed output is a reject (exit 1), not an error."""
    w = workdir
    zkc(w, "all", ADDER_C, "--inputs", str(w / "inputs.txt"), "--bit-width", "16", "--rng-seed", "3")
    (w / "wrong.txt").write_text("6\n", encoding="utf-8")
    out = w / "out"
    capsys.readouterr()

    code = zkc(w, "verify", str(out / "vk.txt"), str(w / "inputs.txt"), str(w / "wrong.txt"), str(out / "proof.txt"))

    assert code == EXIT_REJECT
    assert capsys.readouterr().out.strip() == "Proof is invalid"

    (w / "garbage").write_text("not a proof\n", encoding="utf-8")
    assert zkc(w, "verify", str(out / "vk.txt"), str(w / "inputs.txt"), str(out / "outputs.txt"),
               str(w / "garbage")) == EXIT_REJECT


def test_bitwidth_flag_reaches_the_circuit(workdir):
    """Unit test: --bitwidth 8 is recorded in the circuit header."""
    assert zkc(workdir, "compile", ADDER_C, "--bitwidth", "8") == EXIT_OK

    assert (workdir / "out" / "circuit.txt").read_text(encoding="utf-8").splitlines()[0] == "bitwidth 8"


def test_salary_with_define(workdir):
    """Unit test: -D overrides the header's N and the contract still compiles."""
    code = zkc(workdir, "compile", str(CONTRACTS_DIR / "salary.c"), "--bit-width", "24", "-D", "N=2",
               "--program", str(workdir / "p.txt"))

    assert code == EXIT_OK
    assert "CONST(65000)" in (workdir / "p.txt").read_text(encoding="utf-8")


def test_perturbed_witness_is_an_error(workdir, capsys):
    """Unit test: the hidden test hook makes the prover fail with exit 2."""
    w = workdir
    zkc(w, "all", ADDER_C, "--inputs", str(w / "inputs.txt"), "--bit-width", "16", "--rng-seed", "3")
    out = w / "out"

    code = zkc(w, "prove", str(out / "minimized.txt"), str(out / "ek.txt"), str(w / "inputs.txt"),
               "--perturb-witness", "2")

    assert code == EXIT_USAGE
    assert "error:" in capsys.readouterr().err


def test_user_errors_exit_2(workdir, capsys):
    """Unit test: missing files and bad configuration are reported, not raised."""
    assert zkc(workdir, "compile", str(workdir / "absent.c")) == EXIT_USAGE
    assert zkc(workdir, "compile", ADDER_C, "--bit-width", "40", "--field-modulus", "65521") == EXIT_USAGE
    assert zkc(workdir, "run-chain", str(workdir / "absent.json")) == EXIT_USAGE
    assert "error:" in capsys.readouterr().err


def test_argument_errors_exit_2(workdir):
    """Unit test: argparse usage errors also end with status 2."""
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])

    assert info.value.code == EXIT_USAGE


def test_internal_errors_exit_3(workdir, monkeypatch):
    """Unit test: unexpected exceptions map to status 3."""
    def boom(*_args, **_kwargs):
        raise RuntimeError("boom")

    monkeypatch.setattr("app.services.pipeline.load_sources", boom)

    assert zkc(workdir, "compile", ADDER_C) == EXIT_INTERNAL


def test_default_working_directory(tmp_path, monkeypatch):
    """Unit test: without --workdir, files go to the .zkc directory."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setattr("app.main.artifact_store", ArtifactStore(".zkc"))

    assert main(["compile", ADDER_C, "--bit-width", "16"]) == EXIT_OK
    assert (tmp_path / ".zkc" / "circuit.txt").exists()


def test_negative_inputs_file_verifies_and_settles(tmp_path, capsys):
    """Unit test: the inputs file that produced a proof also verifies it and funds the spend."""
    source = tmp_path / "sum.c"
    source.write_text(
        "struct in_T { int a; int b; };\nstruct out_T { int o; };\n"
        "void contract(struct in_T *in, struct out_T *out) { out->o = in->a + in->b; }\n",
        encoding="utf-8",
    )
    (tmp_path / "inputs.txt").write_text("-5\n7\n", encoding="utf-8")
    out = tmp_path / "out"

    assert zkc(tmp_path, "all", str(source), "--inputs", str(tmp_path / "inputs.txt"),
               "--bit-width", "8", "--rng-seed", "4") == EXIT_OK
    assert (out / "outputs.txt").read_text(encoding="utf-8") == "2\n"
    capsys.readouterr()

    assert zkc(tmp_path, "verify", str(out / "vk.txt"), str(tmp_path / "inputs.txt"), str(out / "outputs.txt"),
               str(out / "proof.txt")) == EXIT_OK
    assert capsys.readouterr().out.strip() == "Proof is valid"
    assert zkc(tmp_path, "script", str(out / "vk.txt"), str(out / "proof.txt"), str(tmp_path / "inputs.txt"),
               str(out / "outputs.txt"), "-o", str(tmp_path / "bundle.json")) == EXIT_OK
    assert zkc(tmp_path, "run-chain", str(tmp_path / "bundle.json")) == EXIT_OK
