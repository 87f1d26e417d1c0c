"""Run configuration: JSON ingestion, validation and system presets."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from . import linalg as la
from .atom import AtomParams, absorber_spec, build_atom_spec, potting_configuration
from .criterion import TOL_LIN, SearchConfig
from .errors import ConfigParseError, NQIError
from .model import SystemSpec

PRESETS = {
    "atom": "two-channel resonant Jaynes-Cummings atom, one-excitation sector; "
    "restricted evolution diag(cos g+t, 1, 1, cos g-t)",
    "atom-potting": "atom with p+ = p- = 0, chi = psi_d' = (|-> - |+>)/sqrt2, c = 1/2; "
    "single-shot optimum 1/16",
    "absorber": "single-channel total absorber (opaque object, c = 0)",
}


# --- complex <-> JSON --------------------------------------------------------

def encode_complex(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_array(a) -> list:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return encode_complex(a)
    return [encode_array(x) for x in a]


def decode_complex(x, where: str) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    raise ConfigParseError("expected a number or a [re, im] pair", field=where)


def decode_vector(x, where: str) -> np.ndarray:
    if not isinstance(x, list) or not x:
        raise ConfigParseError("expected a non-empty array of [re, im] pairs", field=where)
    return np.array([decode_complex(v, f"{where}[{i}]") for i, v in enumerate(x)], dtype=complex)


def decode_matrix(x, where: str) -> np.ndarray:
    if not isinstance(x, list) or not x:
        raise ConfigParseError("expected a non-empty row-major matrix", field=where)
    rows = [decode_vector(r, f"{where}[{i}]") for i, r in enumerate(x)]
    if len({len(r) for r in rows}) != 1:
        raise ConfigParseError("ragged matrix rows", field=where)
    return np.array(rows)


# --- configuration ------------------------------------------------------------

@dataclass
class SystemConfig:
    preset: str | None = None
    params: dict[str, float] = field(default_factory=dict)
    inline: dict[str, Any] | None = None


@dataclass
class ProtocolConfig:
    mode: str = "single"
    alpha: float | None = None
    N: int | None = None
    object_state: list | None = None
    psi_r: list | None = None
    empty: bool = False
    trials: int = 0


@dataclass
class RunConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    tol_rel: float = la.TOL_REL
    tol_lin: float = TOL_LIN
    search: SearchConfig = field(default_factory=SearchConfig)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    witness: dict[str, Any] | None = None
    output_format: str = "json"
    output_path: str | None = None
    seed: int = 0

    def search_config(self) -> SearchConfig:
        return replace(self.search, tol_rel=self.tol_rel, tol_lin=self.tol_lin, seed=self.seed)

    def echo(self) -> dict:
        out = {
            "system": {"preset": self.system.preset, "params": dict(self.system.params)},
            "tolerances": {"tol_rel": self.tol_rel, "tol_lin": self.tol_lin},
            "search": asdict(self.search),
            "protocol": asdict(self.protocol),
            "output": {"format": self.output_format, "path": self.output_path},
            "seed": self.seed,
        }
        if self.system.inline is not None:
            out["system"]["inline"] = self.system.inline
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def _expect(d: dict, key: str, types, where: str, default=None):
    if key not in d:
        return default
    val = d[key]
    if val is None:
        return default
    if isinstance(val, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
        raise ConfigParseError(f"expected {types}, got bool", field=f"{where}.{key}")
    if not isinstance(val, types):
        raise ConfigParseError(f"expected {getattr(types, '__name__', types)}, got {type(val).__name__}", field=f"{where}.{key}")
    return val


def _check_keys(d: dict, allowed: set[str], where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigParseError(f"unknown keys {sorted(unknown)}", field=where)


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigParseError("top level must be an object")
    _check_keys(data, {"system", "tolerances", "search", "protocol", "witness", "output", "seed"}, "<root>")
    cfg = RunConfig()

    sysd = _expect(data, "system", dict, "<root>", {})
    _check_keys(sysd, {"preset", "params", "inline"}, "system")
    preset = _expect(sysd, "preset", str, "system")
    inline = _expect(sysd, "inline", dict, "system")
    if (preset is None) == (inline is None) and sysd:
        raise ConfigParseError("exactly one of 'preset' or 'inline' is required", field="system")
    if preset is not None and preset not in PRESETS:
        raise ConfigParseError(f"unknown preset '{preset}', choose from {sorted(PRESETS)}", field="system.preset")
    params = _expect(sysd, "params", dict, "system", {})
    for k, v in params.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ConfigParseError("expected a number", field=f"system.params.{k}")
    cfg.system = SystemConfig(preset, {k: float(v) for k, v in params.items()}, inline)
    if inline is not None:
        system_from_inline(inline)

    tol = _expect(data, "tolerances", dict, "<root>", {})
    _check_keys(tol, {"tol_rel", "tol_lin"}, "tolerances")
    cfg.tol_rel = float(_expect(tol, "tol_rel", (int, float), "tolerances", cfg.tol_rel))
    cfg.tol_lin = float(_expect(tol, "tol_lin", (int, float), "tolerances", cfg.tol_lin))

    sd = _expect(data, "search", dict, "<root>", {})
    allowed = {"magnitude_points", "phase_points", "extra_random", "workers"}
    _check_keys(sd, allowed, "search")
    cfg.search = SearchConfig(**{k: _expect(sd, k, int, "search") for k in sd})

    pd = _expect(data, "protocol", dict, "<root>", {})
    _check_keys(pd, {"mode", "alpha", "N", "object_state", "psi_r", "empty", "trials"}, "protocol")
    mode = _expect(pd, "mode", str, "protocol", "single")
    if mode not in ("single", "zeno"):
        raise ConfigParseError("mode must be 'single' or 'zeno'", field="protocol.mode")
    alpha = _expect(pd, "alpha", (int, float), "protocol")
    cfg.protocol = ProtocolConfig(
        mode=mode,
        alpha=None if alpha is None else float(alpha),
        N=_expect(pd, "N", int, "protocol"),
        object_state=_expect(pd, "object_state", list, "protocol"),
        psi_r=_expect(pd, "psi_r", list, "protocol"),
        empty=_expect(pd, "empty", bool, "protocol", False),
        trials=_expect(pd, "trials", int, "protocol", 0),
    )
    for key in ("object_state", "psi_r"):
        val = getattr(cfg.protocol, key)
        if val is not None:
            decode_vector(val, f"protocol.{key}")

    wd = _expect(data, "witness", dict, "<root>")
    if wd is not None:
        _check_keys(wd, {"psi_d", "chi"}, "witness")
        for key in ("psi_d", "chi"):
            if key not in wd:
                raise ConfigParseError("missing", field=f"witness.{key}")
            decode_vector(wd[key], f"witness.{key}")
        cfg.witness = wd

    od = _expect(data, "output", dict, "<root>", {})
    _check_keys(od, {"format", "path"}, "output")
    fmt = _expect(od, "format", str, "output", "json")
    if fmt not in ("json", "text"):
        raise ConfigParseError("format must be 'json' or 'text'", field="output.format")
    cfg.output_format = fmt
    cfg.output_path = _expect(od, "path", str, "output")
    cfg.seed = _expect(data, "seed", int, "<root>", 0)
    return cfg


def load_config(path: str | Path) -> RunConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(exc.msg, line=exc.lineno) from exc
    return config_from_dict(data)


def system_from_inline(d: dict) -> SystemSpec:
    """Build a :class:`SystemSpec` from an inline JSON description."""
    _check_keys(d, {"n", "n_ext", "m", "dim_r", "H_S", "H_D", "H_I", "t", "name"}, "system.inline")
    ints = {}
    for key in ("n", "m", "dim_r"):
        val = _expect(d, key, int, "system.inline")
        if val is None:
            raise ConfigParseError("missing", field=f"system.inline.{key}")
        ints[key] = val
    ints["n_ext"] = _expect(d, "n_ext", int, "system.inline", ints["n"])
    t = _expect(d, "t", (int, float), "system.inline")
    if t is None:
        raise ConfigParseError("missing", field="system.inline.t")
    mats = {}
    for key in ("H_S", "H_D", "H_I"):
        if key not in d:
            raise ConfigParseError("missing", field=f"system.inline.{key}")
        mats[key] = decode_matrix(d[key], f"system.inline.{key}")
    try:
        return SystemSpec(t=float(t), name=str(d.get("name", "inline")), **ints, **mats)
    except NQIError as exc:
        raise ConfigParseError(str(exc), field="system.inline") from exc


def atom_params_from(params: dict[str, float]) -> AtomParams:
    t = params.get("t", 1.0)
    omega = params.get("omega", 0.0)
    if "g_plus" in params or "g_minus" in params:
        g = params.get("g", 0.0)
        return AtomParams(params.get("g_plus", g), params.get("g_minus", g), t, omega)
    p = params.get("p", 0.0)
    return AtomParams.from_p(params.get("p_plus", p), params.get("p_minus", p), t, omega)


def resolve_system(cfg: RunConfig):
    """Return ``(spec, preset_witness, provenance)`` for a configuration."""
    if cfg.system.inline is not None:
        return system_from_inline(cfg.system.inline), None, "inline system"
    preset = cfg.system.preset
    if preset is None:
        raise ConfigParseError("no system given (use --preset or a config file)", field="system")
    try:
        if preset == "atom":
            return build_atom_spec(atom_params_from(cfg.system.params)), None, PRESETS[preset]
        if preset == "atom-potting":
            spec, witness, _ = potting_configuration(cfg.system.params.get("omega", 0.0))
            return spec, witness, PRESETS[preset]
        return absorber_spec(cfg.system.params.get("t", 1.0)), None, PRESETS[preset]
    except ValueError as exc:
        raise ConfigParseError(str(exc), field="system.params") from exc
