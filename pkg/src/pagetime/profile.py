"""Per-country network profiles and the size-to-time models they hold."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from typing import Optional, Union

from .exceptions import DomainError, SchemaError, ValidationError

DEFAULT_SERVER_MS = 200.0


@dataclass(frozen=True)
class AffineModel:
    """``time = slope * size + intercept`` (ms per byte, ms)."""

    slope: float
    intercept: float

    def raw(self, x):
        return self.slope * x + self.intercept


@dataclass(frozen=True)
class LogModel:
    """``time = a * ln(size) + b``."""

    a: float
    b: float

    def raw(self, x):
        if x < 1:
            raise DomainError(f"log model needs size >= 1, got {x}")
        return self.a * math.log(x) + self.b


@dataclass(frozen=True)
class ConstantModel:
    c: float

    def raw(self, x):
        return self.c


SizeTimeModel = Union[AffineModel, LogModel, ConstantModel]


def eval_model(model: SizeTimeModel, size) -> float:
    """Evaluate ``model`` at ``size`` and clamp the result at zero."""
    if size < 0:
        raise DomainError(f"size must be non-negative, got {size}")
    return max(0.0, float(model.raw(size)))


_FORMS = {"affine": AffineModel, "log": LogModel, "constant": ConstantModel}
_FORM_NAMES = {cls: name for name, cls in _FORMS.items()}


def model_to_dict(model: Optional[SizeTimeModel]):
    if model is None:
        return None
    out = {"form": _FORM_NAMES[type(model)]}
    for f in fields(model):
        out[f.name] = getattr(model, f.name)
    return out


def model_from_dict(record, name: str) -> Optional[SizeTimeModel]:
    if record is None:
        return None
    if not isinstance(record, dict):
        raise ValidationError(f"{name} must be an object or null")
    form = record.get("form")
    if form not in _FORMS:
        raise SchemaError(f"{name}.form", f"{name}.form must be one of {sorted(_FORMS)}")
    cls = _FORMS[form]
    expected = {f.name for f in fields(cls)}
    for key in record:
        if key != "form" and key not in expected:
            raise SchemaError(f"{name}.{key}", f"unknown field {name}.{key}")
    values = {}
    for key in expected:
        if key not in record:
            raise SchemaError(f"{name}.{key}")
        values[key] = _number(record[key], f"{name}.{key}")
    return cls(**values)


def _number(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{name} must be a number")
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite")
    return float(value)


@dataclass(frozen=True)
class NetworkProfile:
    """Fitted network constants and models for one country.

    ``fbbp_model`` is network latency only; server time lives in ``t_sr_ms``
    and is always added separately. Model fields may be None when the
    profile was assembled from published constants rather than fitted.
    """

    country: str
    t_dnsbp_ms: float
    t_cbp_ms: float
    t_dnssc_ms: float
    t_csc_ms: float
    fbbp_model: Optional[SizeTimeModel] = None
    cdbp_model: Optional[SizeTimeModel] = None
    fbsc_model: Optional[SizeTimeModel] = None
    cdsc_model: Optional[SizeTimeModel] = None
    t_sr_ms: float = DEFAULT_SERVER_MS

    def __post_init__(self):
        for name in CONSTANT_FIELDS:
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValidationError(f"{name} must be a non-negative finite number, got {value}")


CONSTANT_FIELDS = ("t_dnsbp_ms", "t_cbp_ms", "t_dnssc_ms", "t_csc_ms", "t_sr_ms")
MODEL_FIELDS = ("fbbp_model", "cdbp_model", "fbsc_model", "cdsc_model")
_ALL_FIELDS = ("country",) + CONSTANT_FIELDS + MODEL_FIELDS


def profile_to_dict(profile: NetworkProfile) -> dict:
    out = {"country": profile.country}
    for name in CONSTANT_FIELDS:
        out[name] = getattr(profile, name)
    for name in MODEL_FIELDS:
        out[name] = model_to_dict(getattr(profile, name))
    return out


def profile_from_dict(doc) -> NetworkProfile:
    if not isinstance(doc, dict):
        raise ValidationError("profile must be a JSON object")
    for key in doc:
        if key not in _ALL_FIELDS:
            raise SchemaError(key, f"unknown field: {key}")
    for key in _ALL_FIELDS:
        if key not in doc and key != "t_sr_ms":
            raise SchemaError(key)
    if not isinstance(doc["country"], str):
        raise ValidationError("country must be a string")
    kwargs = {"country": doc["country"]}
    for name in CONSTANT_FIELDS:
        if name in doc:
            kwargs[name] = _number(doc[name], name)
    for name in MODEL_FIELDS:
        kwargs[name] = model_from_dict(doc[name], name)
    return NetworkProfile(**kwargs)


def save_profile(profile: NetworkProfile) -> bytes:
    # json writes floats with repr(), which round-trips exactly
    return (json.dumps(profile_to_dict(profile), indent=2) + "\n").encode("utf-8")


def load_profile(data: bytes) -> NetworkProfile:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"profile is not valid JSON: {exc.msg} at {exc.pos}") from exc
    return profile_from_dict(doc)


def read_profile(path) -> NetworkProfile:
    with open(path, "rb") as fh:
        return load_profile(fh.read())
