"""Flat ``key = value`` scenario files.

Lines are ``key = value``; ``#`` starts a comment.  Values are parsed by the
schema of the scenario kind: reals, integers, strings, 3-vectors (``nan``
allowed where a value is left free) and rotations given as 9 reals in
row-major order.  Lists may be separated by spaces or commas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .lie import is_rotation

KINDS = ("free_body", "lie_poisson", "dae_flow", "ocp_rigid_body", "discrete_bvp",
         "euler_poincare_check")

_FREE = "0 0 nan"
_EYE = "1 0 0 0 1 0 0 0 1"

# key -> (type, default); a default of None marks a required key
_COMMON = {"kind": ("str", None), "seed": ("int", "0"), "name": ("str", "")}
SCHEMAS: dict[str, dict[str, tuple[str, str | None]]] = {
    "free_body": {"inertia": ("vec3", None), "omega0": ("vec3", None), "R0": ("rot", _EYE),
                  "horizon": ("real", "10"), "step": ("real", "1e-3")},
    "lie_poisson": {"inertia": ("vec3", None), "alpha0": ("vec3", None),
                    "horizon": ("real", "10"), "step": ("real", "1e-3")},
    "dae_flow": {"lagrangian": ("str", None), "inertia": ("vec3", "1 1 1"),
                 "omega0": ("vec3", "0 0 0"), "xi0": ("vec3", "0 0 0"), "xi1": ("vec3", "0 0 0"),
                 "xi2": ("vec3", "0 0 0"), "R0": ("rot", _EYE),
                 "horizon": ("real", "2"), "step": ("real", "1e-3")},
    "ocp_rigid_body": {"inertia": ("vec3", None), "c1": ("real", None), "c2": ("real", None),
                       "R0": ("rot", _EYE), "Rf": ("rot", None),
                       "omega0": ("vec3", _FREE), "omegaf": ("vec3", _FREE),
                       "horizon": ("real", "4"), "step": ("real", "0.01"),
                       "restarts": ("int", "10"), "tol": ("real", "1e-10")},
    "discrete_bvp": {"N": ("int", None), "G0": ("rot", None), "G1": ("rot", None),
                     "G_N1": ("rot", None), "G_N": ("rot", None), "scale": ("real", "1"),
                     "horizon": ("real", "1")},
    "euler_poincare_check": {"inertia": ("vec3", None), "omega0": ("vec3", None),
                             "curve": ("str", "constant"), "horizon": ("real", "1"),
                             "step": ("real", "1e-3")},
}
CHOICES = {"lagrangian": ("rigid_body", "acceleration"), "curve": ("constant", "flow")}


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    values: dict = field(repr=False)
    seed: int = 0
    source: str = ""

    def __getitem__(self, key):
        return self.values[key]

    def echo(self) -> dict:
        """JSON-friendly copy of the parsed values."""
        out = {}
        for k, v in self.values.items():
            if isinstance(v, np.ndarray):
                out[k] = [None if math.isnan(x) else float(x) for x in v.ravel()]
            else:
                out[k] = v
        return out


def _reals(text: str, key: str) -> np.ndarray:
    parts = text.replace(",", " ").split()
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise ConfigError(f"{key}: expected real numbers, got {text!r}") from None


def _convert(key: str, typ: str, text: str):
    if typ == "str":
        if key in CHOICES and text not in CHOICES[key]:
            raise ConfigError(f"{key}: expected one of {', '.join(CHOICES[key])}, got {text!r}")
        return text
    if typ == "int":
        try:
            val = int(text)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {text!r}") from None
        if val < 0:
            raise ConfigError(f"{key}: must be non-negative")
        return val
    vals = _reals(text, key)
    if typ == "real":
        if vals.size != 1 or not np.isfinite(vals[0]):
            raise ConfigError(f"{key}: expected one finite real, got {text!r}")
        return float(vals[0])
    if typ == "vec3":
        if vals.size != 3 or np.any(np.isinf(vals)):
            raise ConfigError(f"{key}: expected 3 reals, got {text!r}")
        return vals
    if typ == "rot":
        if vals.size != 9 or not np.all(np.isfinite(vals)):
            raise ConfigError(f"{key}: expected 9 reals (row-major 3x3), got {text!r}")
        mat = vals.reshape(3, 3)
        if not is_rotation(mat):
            raise ConfigError(f"{key}: matrix is not a rotation within 1e-10")
        return mat
    raise AssertionError(typ)


def parse_config(text: str, source: str = "<string>") -> ScenarioConfig:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{source}:{lineno}: empty key or value")
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        raw[key] = value
    kind = raw.get("kind")
    if kind is None:
        raise ConfigError(f"{source}: missing 'kind'")
    if kind not in SCHEMAS:
        raise ConfigError(f"{source}: unknown kind {kind!r} (expected one of {', '.join(KINDS)})")
    schema = {**_COMMON, **SCHEMAS[kind]}
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"{source}: unknown keys for {kind}: {', '.join(unknown)}")
    values = {}
    for key, (typ, default) in schema.items():
        if key == "kind":
            continue
        text = raw.get(key, default)
        if text is None:
            raise ConfigError(f"{source}: missing required key {key!r} for {kind}")
        values[key] = _convert(key, typ, text)
    _check_ranges(kind, values, source)
    return ScenarioConfig(kind, values, values.pop("seed"), source)


def _check_ranges(kind: str, v: dict, source: str) -> None:
    def bad(msg):
        raise ConfigError(f"{source}: {msg}")

    if "step" in v and not v["step"] > 0:
        bad("step must be positive")
    if "horizon" in v and not v["horizon"] > 0:
        bad("horizon must be positive")
    if "inertia" in v and (np.any(~np.isfinite(v["inertia"])) or np.any(v["inertia"] <= 0)):
        bad("inertia entries must be positive")
    for key in ("omega0", "alpha0", "xi0", "xi1", "xi2"):
        if key in v and kind != "ocp_rigid_body" and np.any(np.isnan(v[key])):
            bad(f"{key} must be finite")
    if kind == "ocp_rigid_body":
        if v["c1"] < 0 or v["c2"] < 0:
            bad("cost weights must be non-negative")
        for key in ("omega0", "omegaf"):
            if np.any(np.isnan(v[key][:2])):
                bad(f"{key}: only the third (unactuated) entry may be nan")
    if kind == "discrete_bvp" and v["N"] < 4:
        bad("N must be at least 4")


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from None
    return parse_config(text, str(path))
