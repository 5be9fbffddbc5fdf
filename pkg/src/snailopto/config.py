"""Flat ``key = value`` device configuration files.

Every physical key carries its unit as a suffix (``_hz``, ``_db``, ``_w``).
Blank lines and ``#`` comments are ignored. A bundled preset can be
loaded by name, e.g. ``load_config("paper_device")``.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import units
from .circuit import SnailParams
from .effective import HybridParams, LossBudget
from .errors import ParseError, SchemaError
from .response import CalibrationInputs

SCHEMA_VERSION = 1
PRESETS = ("paper_device",)
UNIT_SUFFIXES = ("_hz", "_db", "_w")

REQUIRED = (
    "ec_hz",
    "ej_small_hz",
    "ej_large_hz",
    "g_hz",
    "omega_s_hz",
    "gamma_hz",
    "gamma_ex_hz",
    "kappa_ex_hz",
    "kappa_in_hz",
)
OPTIONAL = {
    "schema_version": SCHEMA_VERSION,
    "kappa_ex_zero_flux_hz": None,
    "kappa_in_zero_flux_hz": None,
    "omega_m_measured_hz": None,
    "alpha0_measured_hz": None,
    "a_m_db": 0.0,
    "a_s_db": 0.0,
    "p_m_w": 0.0,
    "p_s_w": 0.0,
    "n_s": 0.0,
    "kappa_e_hz": None,
    "kappa_a_hz": None,
    "kappa_cross_hz": None,
    "kappa_rad_hz": None,
}
DIMENSIONLESS = ("schema_version", "n_s")
_LOSS_KEYS = ("kappa_e_hz", "kappa_a_hz", "kappa_cross_hz", "kappa_rad_hz")
_LINE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(\S.*?)\s*$")


@dataclass(frozen=True)
class DeviceConfig:
    snail: SnailParams
    hybrid: HybridParams
    calibration: CalibrationInputs
    values: dict
    sha256: str
    source: str = ""
    schema_version: int = SCHEMA_VERSION
    extras: dict = field(default_factory=dict)

    def get(self, key, default=None):
        v = self.values.get(key)
        return default if v is None else v

    def zero_flux_hybrid(self) -> HybridParams:
        """Hybrid constants with the MW loss rates measured at zero flux, when given."""
        kex = self.get("kappa_ex_zero_flux_hz", self.hybrid.kappa_ex)
        kin = self.get("kappa_in_zero_flux_hz", self.hybrid.kappa_in)
        return HybridParams(
            g=self.hybrid.g,
            omega_s=self.hybrid.omega_s,
            kappa_ex=kex,
            kappa_in=kin,
            gamma=self.hybrid.gamma,
            gamma_ex=self.hybrid.gamma_ex,
            loss_budget=self.hybrid.loss_budget,
        )


def parse_config_text(text: str) -> dict:
    """Parse the flat format into ``{key: (float value, line number)}``."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = m.group(1), m.group(2)
        if key in out:
            raise ParseError(f"duplicate key {key!r} (first set on line {out[key][1]})", line=lineno)
        try:
            number = float(value)
        except ValueError:
            raise ParseError(f"value of {key!r} is not a number: {value!r}", line=lineno) from None
        out[key] = (number, lineno)
    return out


def _check_schema(parsed: dict) -> dict:
    known = set(REQUIRED) | set(OPTIONAL)
    for key, (_, lineno) in parsed.items():
        if key in known:
            continue
        if key not in DIMENSIONLESS and not key.endswith(UNIT_SUFFIXES):
            raise SchemaError(f"key {key!r} on line {lineno} has no unit suffix {UNIT_SUFFIXES}", key=key)
        raise SchemaError(f"unknown key {key!r} on line {lineno}", key=key)
    for key in REQUIRED:
        if key not in parsed:
            raise SchemaError(f"missing required key {key!r}", key=key)
    values = dict(OPTIONAL)
    values.update({k: v for k, (v, _) in parsed.items()})
    if int(values["schema_version"]) != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {values['schema_version']!r}", key="schema_version")
    present = [k for k in _LOSS_KEYS if parsed.get(k) is not None]
    if present and len(present) != len(_LOSS_KEYS):
        missing = next(k for k in _LOSS_KEYS if k not in present)
        raise SchemaError(f"loss budget is incomplete; missing {missing!r}", key=missing)
    return values


def _build(values: dict, sha: str, source: str) -> DeviceConfig:
    def wrap(key, fn):
        try:
            return fn()
        except ValueError as exc:
            raise SchemaError(f"invalid value for {key!r}: {exc}", key=key) from exc

    snail = wrap("ej_large_hz", lambda: SnailParams(values["ej_large_hz"], values["ej_small_hz"], values["ec_hz"]))
    budget = None
    if values["kappa_e_hz"] is not None:
        budget = LossBudget(*(values[k] for k in _LOSS_KEYS))
    hybrid = wrap(
        "kappa_ex_hz",
        lambda: HybridParams(
            g=values["g_hz"],
            omega_s=values["omega_s_hz"],
            kappa_ex=values["kappa_ex_hz"],
            kappa_in=values["kappa_in_hz"],
            gamma=values["gamma_hz"],
            gamma_ex=values["gamma_ex_hz"],
            loss_budget=budget,
        ),
    )
    calibration = wrap(
        "a_m_db",
        lambda: CalibrationInputs(
            a_m=units.db_to_ratio(values["a_m_db"]),
            a_s=units.db_to_ratio(values["a_s_db"]),
            p_m=values["p_m_w"],
            p_s=values["p_s_w"],
            n_s=values["n_s"],
        ),
    )
    return DeviceConfig(snail, hybrid, calibration, values, sha, source, int(values["schema_version"]))


def load_config_text(text: str, source: str = "<string>") -> DeviceConfig:
    values = _check_schema(parse_config_text(text))
    sha = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return _build(values, sha, source)


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise SchemaError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}", key=name)
    return resources.files("snailopto").joinpath("presets", f"{name}.conf").read_text(encoding="utf-8")


def load_config(path) -> DeviceConfig:
    """Load and validate a configuration file or a bundled preset name.

    Raises
    ------
    ParseError
        Malformed line (including a non-numeric value) or duplicate key, with the line number.
    SchemaError
        Unknown or missing key (a key without unit suffix counts as unknown)
        or an invalid value; the offending key is attached.
    """
    p = Path(path)
    if not p.exists() and str(path) in PRESETS:
        return load_config_text(preset_text(str(path)), source=str(path))
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return load_config_text(text, source=str(path))
