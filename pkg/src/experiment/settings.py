"""
Experiment configuration: a JSON document parsed strictly into frozen dataclasses.

Unknown keys are rejected with their dotted key path, missing keys take the defaults in
config.py, and range checks of the nested configs are reported under their key path.
"""

import json
import typing
from dataclasses import MISSING, asdict, dataclass, field, fields, is_dataclass, replace
from pathlib import Path
from typing import Any, Optional, Union

from config import HIDDEN_SIZES, NOISE_RATES, OUTPUT_DIR, SEEDS, TEST_RATIO, MIXUP_ALPHA
from data.datasets import SynthSpec
from data.noise import NOISE_KINDS
from errors import ConfigError, DataError
from network.amnn import ClusteringConfig
from network.classic import TrainConfig
from robust.trainer import RobustConfig

ALGORITHMS = ("classic_dnn", "amnn", "robust_dnn", "dnn_mixup", "ce_dnn", "amnn_robust")


@dataclass(frozen=True)
class CsvSource:
    path: str
    label_column: Union[str, int] = -1


@dataclass(frozen=True)
class DataConfig:
    """Exactly one source; with neither given the default synthetic blobs are used."""
    csv: Optional[CsvSource] = None
    synth: Optional[SynthSpec] = None

    def __post_init__(self):
        if self.csv is not None and self.synth is not None:
            raise ConfigError("give either csv or synth, not both")
        if self.csv is None and self.synth is None:
            object.__setattr__(self, "synth", SynthSpec())


@dataclass(frozen=True)
class SplitConfig:
    test_ratio: float = TEST_RATIO
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.test_ratio < 1.0:
            raise ConfigError(f"must lie in [0, 1), got {self.test_ratio}", "test_ratio")


@dataclass(frozen=True)
class NoiseConfig:
    kind: str = "symmetric"
    rates: tuple[float, ...] = tuple(NOISE_RATES)

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ConfigError(f"must be one of {NOISE_KINDS}, got {self.kind!r}", "kind")
        if not self.rates:
            raise ConfigError("rate grid is empty", "rates")
        for rate in self.rates:
            if not 0.0 <= rate <= 1.0:
                raise ConfigError(f"rate {rate} outside [0, 1]", "rates")


@dataclass(frozen=True)
class MixupConfig:
    alpha: float = MIXUP_ALPHA

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError(f"must be > 0, got {self.alpha}", "alpha")


@dataclass(frozen=True)
class ExperimentConfig:
    data: DataConfig = field(default_factory=DataConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    standardize: bool = True
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    algorithms: tuple[str, ...] = ("robust_dnn", "ce_dnn")
    hidden_sizes: tuple[int, ...] = tuple(HIDDEN_SIZES)
    classic: TrainConfig = field(default_factory=TrainConfig)
    robust: RobustConfig = field(default_factory=RobustConfig)
    mixup: MixupConfig = field(default_factory=MixupConfig)
    clustering: ClusteringConfig = field(default_factory=ClusteringConfig)
    seeds: tuple[int, ...] = tuple(SEEDS)
    output_dir: str = OUTPUT_DIR
    log_training: bool = False
    save_models: bool = False

    def __post_init__(self):
        if not self.algorithms:
            raise ConfigError("algorithm list is empty", "algorithms")
        for name in self.algorithms:
            if name not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {name!r}; expected one of {ALGORITHMS}", "algorithms")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ConfigError("algorithms are listed twice", "algorithms")
        if not self.seeds:
            raise ConfigError("seed list is empty", "seeds")
        if any(s < 0 for s in self.seeds):
            raise ConfigError("seeds must be unsigned", "seeds")
        if any(h < 1 for h in self.hidden_sizes):
            raise ConfigError("hidden layer sizes must be >= 1", "hidden_sizes")


# ------------------ strict builder ------------------

def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _convert(value: Any, tp: Any, path: str) -> Any:
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)

    if origin is Union:
        if value is None and type(None) in args:
            return None
        options = [a for a in args if a is not type(None)]
        if len(options) == 1:
            return _convert(value, options[0], path)
        for arg in options:
            try:
                return _convert(value, arg, path)
            except ConfigError:
                pass
        raise ConfigError(f"no accepted type matches {value!r}", path)
    if origin is tuple:
        if not isinstance(value, list):
            raise ConfigError(f"expected a list, got {type(value).__name__}", path)
        return tuple(_convert(v, args[0], f"{path}[{i}]") for i, v in enumerate(value))
    if is_dataclass(tp):
        return build(tp, value, path)
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"expected true/false, got {value!r}", path)
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", path)
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", path)
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", path)
        return value
    raise ConfigError(f"unsupported config type {tp!r}", path)


def build(cls, raw: Any, path: str = ""):
    """Instantiate dataclass `cls` from a JSON object, rejecting unknown keys."""
    if not isinstance(raw, dict):
        raise ConfigError(f"expected an object, got {type(raw).__name__}", path or None)
    hints = typing.get_type_hints(cls)
    known = {f.name for f in fields(cls)}
    for key in raw:
        if key not in known:
            raise ConfigError("unknown key", _join(path, key))
    kwargs = {}
    for f in fields(cls):
        if f.name in raw:
            kwargs[f.name] = _convert(raw[f.name], hints[f.name], _join(path, f.name))
        elif f.default is MISSING and f.default_factory is MISSING:
            raise ConfigError("missing required key", _join(path, f.name))
    try:
        return cls(**kwargs)
    except ConfigError as e:
        key_path = _join(path, e.key_path) if e.key_path else path
        raise ConfigError(e.message, key_path or None) from e
    except DataError as e:
        raise ConfigError(str(e), path or None) from e


def config_from_dict(raw: dict) -> ExperimentConfig:
    return build(ExperimentConfig, raw)


def parse_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"missing config file: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"JSON parse error at line {e.lineno}, column {e.colno}: {e.msg}") from e
    except UnicodeDecodeError as e:
        raise ConfigError(f"{path} is not valid UTF-8: {e.reason} at byte {e.start}") from e
    return config_from_dict(raw)


def config_to_dict(config: ExperimentConfig) -> dict:
    """Plain JSON-ready dict (tuples become lists)."""
    return json.loads(json.dumps(asdict(config)))


def with_seed(config: ExperimentConfig, seed: int) -> ExperimentConfig:
    return replace(config, seeds=(seed,))
