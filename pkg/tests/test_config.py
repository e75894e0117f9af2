"""
Unit tests for configuration loading and validation.
"""

import pytest

from app.models.config import MERSENNE_61, MERSENNE_127, PipelineConfig, default_modulus
from app.services.config import load_config, parse_defines, read_config_file
from app.services.errors import ConfigError


def write(tmp_path, text):
    path = tmp_path / "zkc.conf"
    path.write_text(text, encoding="utf-8")
    return path


def test_parse_defines():
    """Unit test: NAME=VALUE pairs and bare flags."""
    assert parse_defines("N=8, DEBUG,,X=") == {"N": "8", "DEBUG": "1", "X": "1"}


def test_default_modulus():
    """Unit test: 2^61 - 1 while 2^(2n) fits below it, 2^127 - 1 above."""
    assert default_modulus(16) == MERSENNE_61
    assert default_modulus(30) == MERSENNE_61
    assert default_modulus(31) == MERSENNE_127
    assert PipelineConfig(bit_width=32).field_modulus == MERSENNE_127


def test_config_file_values(tmp_path):
    """Unit test: integers (hex too), strategy and defines are typed."""
    path = write(tmp_path, "BIT_WIDTH=8\nSTRATEGY=round-robin\nCORES=0x2\nDEFINES=N=2,DEBUG\n")

    assert read_config_file(path) == {
        "bit_width": 8, "strategy": "round-robin", "cores": 2, "defines": {"N": "2", "DEBUG": "1"},
    }


def test_overrides_beat_the_file(tmp_path):
    """Unit test: CLI flags win over the file; defines are merged."""
    path = write(tmp_path, "BIT_WIDTH=8\nCORES=2\nDEFINES=N=2,DEBUG\n")

    cfg = load_config(path, {"bit_width": 16, "cores": None, "defines": {"N": "4"}})

    assert cfg.bit_width == 16
    assert cfg.cores == 2
    assert cfg.defines == {"N": "4", "DEBUG": "1"}
    assert cfg.field_modulus == MERSENNE_61


@pytest.mark.parametrize(
    "text",
    ["COLOUR=blue\n", "BIT_WIDTH=eight\n"],
)
def test_bad_config_file(tmp_path, text):
    """Unit test: unknown keys and non-integers are ConfigErrors."""
    with pytest.raises(ConfigError):
        read_config_file(write(tmp_path, text))


def test_missing_config_file(tmp_path):
    """Unit test: a named config file must exist."""
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.conf")


@pytest.mark.parametrize(
    "overrides",
    [
        {"bit_width": 0},
        {"cores": -1},
        {"field_modulus": 15},
        {"bit_width": 32, "field_modulus": MERSENNE_61},
        {"max_logic_inputs": 17},
        {"strategy": "fastest"},
    ],
)
def test_invalid_settings(overrides):
    """Unit test: validation failures surface as ConfigError."""
    with pytest.raises(ConfigError):
        load_config(overrides=overrides)
