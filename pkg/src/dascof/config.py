"""Sweep configuration: a versioned JSON document checked against a schema."""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

from .channels import ChannelModel
from .gfield import GaussianPrime

__all__ = [
    "ConfigError",
    "SimConfig",
    "UPLINK_SCHEMES",
    "DOWNLINK_SCHEMES",
    "load_config",
    "config_from_dict",
    "schema",
]

UPLINK_SCHEMES = ("cof", "qcof", "lqf", "qmf", "qf")
DOWNLINK_SCHEMES = ("rcof", "rqcof", "cdpc", "czfb", "zfb", "dpc", "ifb", "cooperative")
DEFAULT_P = 251


class ConfigError(ValueError):
    """The configuration is missing, unreadable or violates the schema."""


@dataclass(frozen=True)
class SimConfig:
    model: ChannelModel
    snr_db: tuple
    r0: tuple
    schemes: tuple
    trials: int
    p: int = DEFAULT_P
    selection: str = "greedy"
    seed: int = 0

    @property
    def random_subset(self) -> int | None:
        """Subset size for ``random:N`` selection, else ``None``."""
        if self.selection.startswith("random:"):
            return int(self.selection.split(":", 1)[1])
        return None


def schema() -> dict:
    text = resources.files("dascof").joinpath("schema/config.schema.json").read_text()
    return json.loads(text)


def _where(err: jsonschema.ValidationError) -> str:
    path = "/".join(str(x) for x in err.absolute_path)
    return path or "<root>"


def config_from_dict(doc: dict, seed: int | None = None) -> SimConfig:
    """Validate ``doc`` and build a :class:`SimConfig`.

    ``seed`` overrides the document's seed.

    Raises
    ------
    ConfigError
        With the offending field path in the message.
    """
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: [str(x) for x in e.absolute_path])
    if errors:
        e = errors[0]
        raise ConfigError(f"field {_where(e)}: {e.message}")
    m = doc["model"]
    try:
        GaussianPrime(int(doc.get("p", DEFAULT_P)))
    except ValueError as exc:
        raise ConfigError(f"field p: {exc}") from None
    try:
        model = ChannelModel(
            kind=m["kind"],
            K=m["K"],
            L=m["L"],
            q=m.get("q", 1.0),
            gamma=m.get("gamma", 0.0),
            circulant=m.get("circulant", True),
            seed=doc.get("seed", 0) if seed is None else seed,
        )
    except ValueError as exc:
        raise ConfigError(f"field model: {exc}") from None
    return SimConfig(
        model=model,
        snr_db=tuple(float(x) for x in doc["snr_db"]),
        r0=tuple(float(x) for x in doc["r0"]),
        schemes=tuple(doc["schemes"]),
        trials=int(doc["trials"]),
        p=int(doc.get("p", DEFAULT_P)),
        selection=doc.get("selection", "greedy"),
        seed=model.seed,
    )


def load_config(path, seed: int | None = None) -> SimConfig:
    """Read and validate a JSON configuration file.

    JSON syntax errors report the line and column.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return config_from_dict(doc, seed)
