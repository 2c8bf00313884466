from pathlib import Path

import pytest
from pydantic import ValidationError

from nc_restriction.experiment_config import (
    PARAMETER_MODELS,
    ConfigFileError,
    UnknownCommandError,
    parameter_model,
    read_config_file,
    resolve_config,
)

DATA_PATH = Path(__file__).parent / "data"
config_path = DATA_PATH / "key_lemma.cfg"
broken_path = DATA_PATH / "broken.cfg"


def test_defaults():
    config = resolve_config("delta-exact")
    assert config.parameters.group == "dihedral:6"
    assert config.parameters.V == "indices:0,1,5,7"
    assert config.seed == 0
    assert config.output_format == "csv"
    assert resolve_config("lattice-count").parameters.log_power == 0


def test_read_config_file():
    values = read_config_file(str(config_path))
    assert values == {"rho": "4", "eps": "0.1, 0.05", "samples": "20000", "seed": "3"}


def test_ConfigFileError():
    with pytest.raises(ConfigFileError):
        read_config_file(str(broken_path))


def test_flags_override_file():
    config = resolve_config("key-lemma", {"samples": "40000", "max-iterations": None}, read_config_file(str(config_path)))
    assert config.parameters.samples == 40_000
    assert config.parameters.rho == 4.0
    assert config.parameters.eps == (0.1, 0.05)
    assert config.seed == 3


def test_comma_separated_tuples():
    config = resolve_config("lattice-maps", {"powers": "4,3,2", "exponents": "4, 4"})
    assert config.parameters.powers == (4, 3, 2)
    assert config.parameters.exponents == (4.0, 4.0)


def test_common_keys():
    config = resolve_config("group", {"output": "out/group.parquet", "format": "parquet", "seed": 9})
    assert config.output_path == "out/group.parquet"
    assert config.echo()["format"] == "parquet"
    assert config.echo()["parameters"]["group"] == "cyclic:8"


def test_ValidationError():
    with pytest.raises(ValidationError):
        resolve_config("key-lemma", {"radius": 3})
    with pytest.raises(ValidationError):
        resolve_config("key-lemma", {"samples": 100})
    with pytest.raises(ValidationError):
        resolve_config("group", {"format": "xlsx"})
    with pytest.raises(ValidationError):
        resolve_config("identity-check", {"identity": "associativity"})


def test_UnknownCommandError():
    with pytest.raises(UnknownCommandError):
        parameter_model("unknown")
    assert set(PARAMETER_MODELS) >= {"group", "norm", "delta-exact", "delta-mc", "key-lemma", "lattice-count"}
