"""Versioned JSON model documents. Floats are written with repr, which round-trips bit-exactly."""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from config import MODEL_FORMAT, MODEL_FORMAT_VERSION
from errors import ConfigError
from network.amnn import AmnnModel
from network.mlp import Mlp


@dataclass(frozen=True, eq=False)
class Standardization:
    means: np.ndarray
    stddevs: np.ndarray


def _mlp_to_dict(net: Mlp) -> dict:
    return {
        "layer_sizes": list(net.layer_sizes),
        "hidden_activation": net.hidden_activation,
        "output_activation": net.output_activation,
        "weights": [w.ravel(order="C").tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
    }


def _mlp_from_dict(doc: dict) -> Mlp:
    sizes = [int(s) for s in doc["layer_sizes"]]
    weights = [
        np.asarray(flat, dtype=float).reshape(fan_in, fan_out)
        for flat, fan_in, fan_out in zip(doc["weights"], sizes[:-1], sizes[1:])
    ]
    biases = [np.asarray(b, dtype=float) for b in doc["biases"]]
    return Mlp(sizes, weights, biases, doc["hidden_activation"], doc["output_activation"])


def model_to_dict(model: Union[Mlp, AmnnModel], standardization: Optional[Standardization] = None) -> dict:
    doc = {"format": MODEL_FORMAT, "version": MODEL_FORMAT_VERSION}
    if isinstance(model, Mlp):
        doc["kind"] = "mlp"
        doc["model"] = _mlp_to_dict(model)
    else:
        doc["kind"] = "amnn"
        doc["model"] = {
            "denom": model.denom,
            "center_shape": list(model.center_points.shape),
            "center_points": model.center_points.ravel(order="C").tolist(),
            "subnets": [_mlp_to_dict(s) for s in model.subnets],
        }
    doc["standardization"] = None if standardization is None else {
        "means": np.asarray(standardization.means).tolist(),
        "stddevs": np.asarray(standardization.stddevs).tolist(),
    }
    return doc


def model_from_dict(doc: dict) -> tuple[Union[Mlp, AmnnModel], Optional[Standardization]]:
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        found = doc.get("format") if isinstance(doc, dict) else type(doc).__name__
        raise ConfigError(f"not a model document (format={found!r})", "format")
    if doc.get("version") != MODEL_FORMAT_VERSION:
        raise ConfigError(f"unsupported model version {doc.get('version')!r}", "version")
    kind = doc.get("kind")
    if kind not in ("mlp", "amnn"):
        raise ConfigError(f"unknown model kind {kind!r}", "kind")
    try:
        body = doc["model"]
        if kind == "mlp":
            model = _mlp_from_dict(body)
        else:
            model = AmnnModel(
                center_points=np.asarray(body["center_points"], dtype=float).reshape(body["center_shape"]),
                denom=float(body["denom"]),
                subnets=[_mlp_from_dict(s) for s in body["subnets"]],
            )
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"malformed model document: {e}", "model") from e
    scaling = doc.get("standardization")
    standardization = None if scaling is None else Standardization(
        means=np.asarray(scaling["means"], dtype=float),
        stddevs=np.asarray(scaling["stddevs"], dtype=float),
    )
    return model, standardization


def save_model(model, path: Union[str, Path], standardization: Optional[Standardization] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(model_to_dict(model, standardization), indent=1) + "\n", encoding="utf-8")
    return path


def load_model(path: Union[str, Path]) -> tuple[Union[Mlp, AmnnModel], Optional[Standardization]]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"missing model file: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    except UnicodeDecodeError as e:
        raise ConfigError(f"{path} is not valid UTF-8: {e.reason} at byte {e.start}") from e
    return model_from_dict(doc)
