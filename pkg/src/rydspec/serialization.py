"""JSON/CSV boundary: configs in, traces and records out.

At the boundary frequencies are ordinary frequencies in Hz and angles are in
degrees; internally everything is rad/s and radians.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from datetime import datetime, timezone
from functools import lru_cache
from importlib import resources

import jsonschema
import numpy as np

from . import __version__
from .angular import HalfInt
from .constants import TWO_PI
from .eit import LadderConfig, SpectrumTrace, preset
from .exceptions import DomainError

_HZ_FIELDS = (
    "probe_rabi",
    "coupling_rabi",
    "mw_rabi",
    "probe_detuning",
    "mw_detuning",
    "coupling_detuning",
    "decay_e",
    "decay_rS",
    "decay_rP",
    "extra_dephasing",
)
_PLAIN_FIELDS = (
    "probe_wavelength",
    "coupling_wavelength",
    "temperature",
    "atomic_mass",
    "coupling_target",
    "coupling_mode",
)


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("rydspec").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(record, name: str):
    """Validate ``record`` against a shipped schema; DomainError with field path."""
    validator = jsonschema.Draft202012Validator(load_schema(name))
    errors = sorted(validator.iter_errors(record), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise DomainError(f"{name}: {path}: {err.message}")


def config_from_dict(data: dict) -> LadderConfig:
    validate(data, "ladder_config")
    kwargs = {}
    for key in _HZ_FIELDS:
        if key in data:
            kwargs[key] = TWO_PI * float(data[key])
    for key in _PLAIN_FIELDS:
        if key in data:
            kwargs[key] = data[key]
    if "mw_theta" in data:
        kwargs["mw_theta"] = math.radians(float(data["mw_theta"]))
    for key in ("rydberg_lower", "rydberg_upper"):
        if key in data:
            kwargs[key] = HalfInt.of(data[key])
    if "coupling_weights" in data:
        kwargs["coupling_weights"] = tuple(
            (HalfInt.of(w["m"]), complex(w.get("re", 0.0), w.get("im", 0.0)))
            for w in data["coupling_weights"]
        )
    if "preset" in data:
        return preset(data["preset"], **kwargs)
    return LadderConfig(**kwargs)


def config_to_dict(config: LadderConfig) -> dict:
    out = {key: getattr(config, key) / TWO_PI for key in _HZ_FIELDS}
    out.update({key: getattr(config, key) for key in _PLAIN_FIELDS})
    out["mw_theta"] = math.degrees(config.mw_theta)
    out["rydberg_lower"] = str(config.rydberg_lower)
    out["rydberg_upper"] = str(config.rydberg_upper)
    out["coupling_weights"] = [
        {"m": str(m), "re": a.real, "im": a.imag} for m, a in config.coupling_weights
    ]
    return out


def load_config(path) -> tuple[LadderConfig, bytes]:
    """Parse a JSON config file; returns the config and the raw bytes."""
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: invalid JSON: {exc}") from exc
    return config_from_dict(data), raw


def digest(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def run_manifest(command: str, config_bytes: bytes) -> dict:
    return {
        "command": command,
        "config_digest": digest(config_bytes),
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def dumps(record) -> str:
    """Deterministic JSON text (sorted keys, trailing newline)."""
    return json.dumps(record, indent=2, sort_keys=True) + "\n"


def _fmt(x) -> str:
    return repr(float(x))


def write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else _fmt(v) for v in row])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def trace_rows(trace: SpectrumTrace):
    return zip(trace.coupling_detunings / TWO_PI, trace.transmission)


def write_trace_csv(path, trace: SpectrumTrace):
    write_csv(path, ["coupling_detuning_hz", "transmission"], trace_rows(trace))


def read_trace_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``coupling_detuning_hz,transmission``; returns rad/s and values."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"coupling_detuning_hz", "transmission"} <= set(reader.fieldnames):
            raise DomainError(f"{path}: expected columns coupling_detuning_hz,transmission")
        try:
            rows = [(float(r["coupling_detuning_hz"]), float(r["transmission"])) for r in reader]
        except (TypeError, ValueError) as exc:
            raise DomainError(f"{path}: malformed number: {exc}") from exc
    if not rows:
        raise DomainError(f"{path}: no data rows")
    arr = np.array(rows)
    return arr[:, 0] * TWO_PI, arr[:, 1]
