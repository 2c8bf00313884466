"""
Experiment Config Module

Validated parameters of every command line experiment. Values come from three layers: command line flags
override entries of a flat key=value config file, which override the defaults declared on the models below.
Unknown keys are rejected before anything is computed.

"""

import logging
from typing import Any, Dict, Literal, Optional, Tuple, Type

from pydantic import BaseModel, ConfigDict, Field, field_validator

logger = logging.getLogger(__name__)

COMMON_KEYS = ("seed", "output", "format")


class ConfigFileError(Exception):
    """Exception raised when a config file line is not of the form key=value"""


class UnknownCommandError(Exception):
    """Exception raised when no parameter model exists for a command"""


def normalise_key(key: str) -> str:
    return key.strip().replace("-", "_")


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return tuple(token.strip() for token in value.split(",") if token.strip())
    return value


class Parameters(BaseModel):
    """Base of the per-command models; comma separated strings are accepted for tuple fields."""

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    @field_validator("*", mode="before")
    @classmethod
    def _split_tuples(cls, value: Any, info) -> Any:
        annotation = str(cls.model_fields[info.field_name].annotation)
        return _split_list(value) if "Tuple" in annotation or "tuple" in annotation else value


class GroupParameters(Parameters):
    group: str = Field("cyclic:8", description="group descriptor, e.g. dihedral:6")
    radius: int = Field(1, ge=0, description="word ball radius listed with the elements")


class NormParameters(Parameters):
    group: str = Field("cyclic:4", description="group descriptor")
    symbol: str = Field("random:0", description="symbol family, e.g. gaussian:1.5 or random:7")
    symbol_csv: Optional[str] = Field(None, description="CSV file with columns s1..sn, re, im")
    arity: int = Field(1, ge=1, le=3)
    p: float = Field(2.0, ge=1.0, description="target exponent")
    exponents: Optional[Tuple[float, ...]] = Field(None, description="input exponents, default n * p each")
    restarts: int = Field(20, ge=1)
    max_iterations: int = Field(200, ge=1)
    workers: int = Field(1, ge=1)


class IdentityCheckParameters(Parameters):
    identity: Literal["consummation", "translation", "nested", "all"] = "all"
    max_order: int = Field(12, ge=1, le=24, description="largest group order in the random sweep")
    max_arity: int = Field(3, ge=2, le=3)
    configurations: int = Field(100, ge=1)
    trials: int = Field(3, ge=1, description="random inputs per configuration")


class RestrictParameters(Parameters):
    group: str = "dihedral:6"
    subgroup: str = Field("indices:0,2,4", description="subset spec of the subgroup members")
    symbol: str = "positive:0"
    arity: int = Field(1, ge=1, le=3)
    p: float = Field(3.0, ge=1.0)
    exponents: Optional[Tuple[float, ...]] = None
    restarts: int = Field(200, ge=1)
    workers: int = Field(1, ge=1)


class PeriodizeParameters(Parameters):
    group: str = "cyclic:4"
    normal: str = Field("indices:0,2", description="subset spec of the normal subgroup")
    symbol: str = Field("random:0", description="symbol family on the quotient")
    arity: int = Field(2, ge=1, le=3)
    exponents: Optional[Tuple[float, ...]] = None
    trials: int = Field(10, ge=1)


class LatticeMapsParameters(Parameters):
    group: str = "cyclic:64"
    powers: Tuple[int, ...] = Field((3, 2, 1), description="levels 2^k Z_N, coarsest first")
    symbol: str = "vonmises:2"
    arity: int = Field(2, ge=1, le=3)
    exponents: Optional[Tuple[float, ...]] = None
    trials: int = Field(5, ge=1)


class DeltaExactParameters(Parameters):
    group: str = "dihedral:6"
    F: str = Field("indices:6", description="subset spec of F")
    V: str = Field("indices:0,1,5,7", description="subset spec of V")


class DeltaMcParameters(Parameters):
    model: str = Field("sl:2", description="Lie model, ignored when a finite group is given")
    group: Optional[str] = Field(None, description="finite group descriptor for the exact comparison")
    F: Optional[str] = Field(None, description="subset spec of F on a finite group")
    V: Optional[str] = Field(None, description="subset spec of V on a finite group")
    matrices: Optional[str] = Field(None, description="CSV of group matrices m00, m01, ... forming F")
    rho: float = Field(2.0, ge=1.0, description="adjoint ball radius for random F")
    f_size: int = Field(3, ge=1)
    neighbourhood: str = Field("tube:0.025,0.5", description="ball:R or tube:eps,R")
    samples: int = Field(1_000_000, ge=10_000)
    batch: Optional[int] = None
    workers: int = Field(1, ge=1)


class KeyLemmaParameters(Parameters):
    rho: float = Field(2.0, ge=1.0)
    R: float = Field(0.5, gt=0.0)
    eps: Tuple[float, ...] = (0.1, 0.05, 0.025)
    samples: int = Field(10_000_000, ge=10_000)
    batch: Optional[int] = None
    workers: int = Field(1, ge=1)
    tolerance: float = Field(0.1, gt=0.0, description="accepted relative distance of the final ratio to rho")


class OrbitDimParameters(Parameters):
    models: Tuple[str, ...] = ("sl:2", "sl:3", "sl:4", "sl:5")
    samples: int = Field(1000, ge=1)


class LatticeCountParameters(Parameters):
    radii: Tuple[float, ...] = (100.0, 250.0, 500.0, 1000.0, 2500.0)
    log_power: int = Field(0, ge=0, description="power of log rho divided out before the fit")
    tolerance: float = Field(0.15, gt=0.0, description="accepted distance of the exponent to 1")


class DensityParameters(Parameters):
    models: Tuple[str, ...] = ("sl:2", "sl:3")
    points: int = Field(500, ge=1)
    max_ad: float = Field(2.0, gt=0.0, description="bound on the operator norm of ad_x")
    series_terms: int = Field(30, ge=8)
    vectors: Optional[str] = Field(None, description="CSV of algebra coordinates x0, x1, ... for the first model")


class TransferenceParameters(Parameters):
    order: int = Field(256, ge=4, description="order L of the cyclic surrogate")
    radius: int = Field(4, ge=0, description="inputs live on {-radius, ..., radius}")
    alphas: Tuple[int, ...] = (8, 16, 32)
    p1: float = Field(2.0, ge=1.0)
    p2: float = Field(2.0, ge=1.0)
    width: float = Field(1.5, gt=0.0)
    tolerance: float = Field(0.05, gt=0.0)


PARAMETER_MODELS: Dict[str, Type[Parameters]] = {
    "group": GroupParameters,
    "norm": NormParameters,
    "identity-check": IdentityCheckParameters,
    "restrict": RestrictParameters,
    "periodize": PeriodizeParameters,
    "lattice-maps": LatticeMapsParameters,
    "delta-exact": DeltaExactParameters,
    "delta-mc": DeltaMcParameters,
    "key-lemma": KeyLemmaParameters,
    "orbit-dim": OrbitDimParameters,
    "lattice-count": LatticeCountParameters,
    "density": DensityParameters,
    "transference": TransferenceParameters,
}

Command = Literal[
    "group",
    "norm",
    "identity-check",
    "restrict",
    "periodize",
    "lattice-maps",
    "delta-exact",
    "delta-mc",
    "key-lemma",
    "orbit-dim",
    "lattice-count",
    "density",
    "transference",
]


class ExperimentConfig(BaseModel):
    """A fully resolved experiment: command, its validated parameters, output location and seed."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    command: Command
    parameters: Parameters
    output_path: Optional[str] = None
    output_format: Literal["csv", "parquet", "json"] = "csv"
    seed: int = Field(0, ge=0, lt=2**64)

    def echo(self) -> Dict[str, Any]:
        """Resolved values for the output metadata"""
        return {
            "command": self.command,
            "seed": self.seed,
            "output_path": self.output_path,
            "format": self.output_format,
            "parameters": self.parameters.model_dump(),
        }


def read_config_file(path: str) -> Dict[str, str]:
    """
    Read a flat key=value file.

    Blank lines and lines starting with '#' are ignored, keys may use '-' or '_'.

    Raises:
        ConfigFileError: a line has no '=' or an empty key.
    """
    values = {}
    with open(path, encoding="utf-8") as file:
        for number, line in enumerate(file, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            key, separator, value = stripped.partition("=")
            if not separator or not key.strip():
                raise ConfigFileError(f"{path}:{number}: expected key=value, got '{stripped}'.")
            values[normalise_key(key)] = value.strip()
    return values


def parameter_model(command: str) -> Type[Parameters]:
    try:
        return PARAMETER_MODELS[command]
    except KeyError as error:
        raise UnknownCommandError(f"Unknown command '{command}'.") from error


def resolve_config(
    command: str,
    flags: Dict[str, Any] | None = None,
    file_values: Dict[str, Any] | None = None,
) -> ExperimentConfig:
    """
    Merge file values and flags (flags win) over the model defaults and validate them.

    The keys seed, output and format are common to all commands and go to the ExperimentConfig itself.

    Raises:
        UnknownCommandError: no model for the command.
        pydantic.ValidationError: unknown keys or invalid values.
    """
    merged = {normalise_key(key): value for key, value in (file_values or {}).items()}
    merged.update({normalise_key(key): value for key, value in (flags or {}).items() if value is not None})
    common = {key: merged.pop(key) for key in COMMON_KEYS if key in merged}
    parameters = parameter_model(command).model_validate(merged)
    config = ExperimentConfig(
        command=command,
        parameters=parameters,
        output_path=common.get("output"),
        output_format=common.get("format", "csv"),
        seed=common.get("seed", 0),
    )
    logger.debug("resolved config %s", config.echo())
    return config
