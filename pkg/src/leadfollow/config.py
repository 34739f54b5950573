"""Config file handling: TOML run descriptions, overrides, and manifests.

A run is described by one human-editable TOML file with sections mirroring
the module vocabulary::

    [domain]   x_min, x_max, n_cells
    [time]     dt, t_final, record_every (0 = auto)
    [kernels.F] / [kernels.L]   variant + parameters
    [rates.F]   / [rates.L]     variant + parameters
    [initial]  kind = "proportional" | "separate", shapes, sigma0_F
    [numerics] cfl_limit
    [micro]    n_particles, seed, sampling

``leadfollow`` also re-reads the JSON manifests it writes (the resolved
config is embedded under "config"), so a finished run can be replayed
bitwise from its manifest.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):  # pragma: no cover
    import tomllib
else:
    import tomli as tomllib

from . import __version__
from .initial import (
    GaussianMixDensity,
    InitialCondition,
    ProportionalInit,
    SeparateInit,
    TwoPlateauDensity,
    UniformDensity,
)
from .kernels import (
    CombinedPowerLaw,
    HegselmannKrause,
    KernelSpec,
    PowerLawAttract,
    PowerLawRepel,
    SteeringDrift,
    ZeroKernel,
)
from .macro import MacroConfig
from .measures import LabelDist
from .micro import MicroConfig
from .rates import (
    ConstantRate,
    MassSigmoid,
    MollifiedMassThreshold,
    RateSpec,
    TargetVarianceSigmoid,
    VarianceSigmoid,
)


class ConfigError(ValueError):
    """Invalid or missing configuration key; message names the key."""


# ---------------------------------------------------------------------------
# spec <-> dict
# ---------------------------------------------------------------------------
_KERNEL_FIELDS = {
    "hegselmann_krause": (HegselmannKrause, ("C", "mollify_width", "attract")),
    "power_attract": (PowerLawAttract, ("c_A", "eps", "attract")),
    "power_repel": (PowerLawRepel, ("ell_R", "c_R", "eps", "attract")),
    "power_combined": (CombinedPowerLaw, ("c_A", "ell_R", "c_R", "eps", "attract")),
    "steering": (SteeringDrift, ("x_hat", "attract")),
    "zero": (ZeroKernel, ("attract",)),
}

_RATE_FIELDS = {
    "constant": (ConstantRate, ("value",)),
    "variance_sigmoid": (VarianceSigmoid, ("on", "delta", "steepness", "mass_guard")),
    "mass_sigmoid": (MassSigmoid, ("on", "delta", "steepness")),
    "target_variance_sigmoid": (
        TargetVarianceSigmoid,
        ("x_hat", "delta", "steepness", "mass_guard", "on"),
    ),
    "mollified_mass_threshold": (
        MollifiedMassThreshold,
        ("eps", "c_bar", "width", "on"),
    ),
}


def _variant_name(table: dict, obj) -> str:
    for name, (cls, _) in table.items():
        if isinstance(obj, cls):
            return name
    raise ConfigError(f"unserializable spec {type(obj).__name__}")


def _spec_to_dict(table: dict, obj) -> dict:
    name = _variant_name(table, obj)
    _, fields = table[name]
    out = {"variant": name}
    for f in fields:
        out[f] = getattr(obj, f)
    return out


def _spec_from_dict(table: dict, data: dict, where: str):
    if "variant" not in data:
        raise ConfigError(f"{where}.variant is required")
    name = data["variant"]
    if name not in table:
        raise ConfigError(
            f"{where}.variant: unknown {name!r}; valid: {', '.join(sorted(table))}"
        )
    cls, fields = table[name]
    kwargs = {}
    for key, value in data.items():
        if key == "variant":
            continue
        if key not in fields:
            raise ConfigError(f"{where}.{key}: not a parameter of {name}")
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def kernel_to_dict(spec: KernelSpec) -> dict:
    return _spec_to_dict(_KERNEL_FIELDS, spec)


def kernel_from_dict(data: dict, where: str) -> KernelSpec:
    return _spec_from_dict(_KERNEL_FIELDS, data, where)


def rate_to_dict(spec: RateSpec) -> dict:
    return _spec_to_dict(_RATE_FIELDS, spec)


def rate_from_dict(data: dict, where: str) -> RateSpec:
    return _spec_from_dict(_RATE_FIELDS, data, where)


def _shape_to_dict(shape) -> dict:
    if isinstance(shape, UniformDensity):
        return {"shape": "uniform"}
    if isinstance(shape, TwoPlateauDensity):
        return {"shape": "two_plateau", "d": shape.d, "u": shape.u}
    if isinstance(shape, GaussianMixDensity):
        return {
            "shape": "gaussian_mix",
            "components": [list(c) for c in shape.components],
        }
    raise ConfigError(f"unserializable shape {type(shape).__name__}")


def _shape_from_dict(data: dict, where: str):
    kind = data.get("shape")
    if kind == "uniform":
        return UniformDensity()
    if kind == "two_plateau":
        try:
            return TwoPlateauDensity(d=data["d"], u=data["u"])
        except KeyError as exc:
            raise ConfigError(f"{where}.{exc.args[0]} is required") from exc
    if kind == "gaussian_mix":
        comps = data.get("components")
        if not comps:
            raise ConfigError(f"{where}.components is required")
        return GaussianMixDensity(tuple(tuple(float(v) for v in c) for c in comps))
    raise ConfigError(
        f"{where}.shape: unknown {kind!r}; valid: uniform, two_plateau, gaussian_mix"
    )


def initial_to_dict(init: InitialCondition) -> dict:
    if isinstance(init, ProportionalInit):
        out = {"kind": "proportional", "sigma0_F": init.sigma0.p_F}
        out.update(_shape_to_dict(init.shape))
        return out
    return {
        "kind": "separate",
        "F": _shape_to_dict(init.shape_F),
        "L": _shape_to_dict(init.shape_L),
    }


def initial_from_dict(data: dict, where: str = "initial") -> InitialCondition:
    kind = data.get("kind")
    if kind == "proportional":
        if "sigma0_F" not in data:
            raise ConfigError(f"{where}.sigma0_F is required")
        p_F = float(data["sigma0_F"])
        return ProportionalInit(_shape_from_dict(data, where), LabelDist(p_F, 1.0 - p_F))
    if kind == "separate":
        for side in ("F", "L"):
            if side not in data:
                raise ConfigError(f"{where}.{side} is required")
        return SeparateInit(
            shape_F=_shape_from_dict(data["F"], f"{where}.F"),
            shape_L=_shape_from_dict(data["L"], f"{where}.L"),
        )
    raise ConfigError(f"{where}.kind: unknown {kind!r}; valid: proportional, separate")


# ---------------------------------------------------------------------------
# config dict <-> run configs
# ---------------------------------------------------------------------------
def macro_to_dict(cfg: MacroConfig) -> dict:
    return {
        "domain": {"x_min": cfg.x_min, "x_max": cfg.x_max, "n_cells": cfg.n_cells},
        "time": {
            "dt": cfg.dt,
            "t_final": cfg.t_final,
            "record_every": cfg.record_every or 0,
        },
        "kernels": {"F": kernel_to_dict(cfg.kernel_F), "L": kernel_to_dict(cfg.kernel_L)},
        "rates": {"F": rate_to_dict(cfg.rate_F), "L": rate_to_dict(cfg.rate_L)},
        "initial": initial_to_dict(cfg.initial),
        "numerics": {"cfl_limit": cfg.cfl_limit},
    }


def _need(data: dict, section: str, key: str):
    if section not in data:
        raise ConfigError(f"section [{section}] is required")
    if key not in data[section]:
        raise ConfigError(f"{section}.{key} is required")
    return data[section][key]


def macro_from_dict(data: dict) -> MacroConfig:
    known = {"domain", "time", "kernels", "rates", "initial", "numerics", "micro"}
    for section in data:
        if section not in known:
            raise ConfigError(f"unknown section [{section}]")
    kernels = data.get("kernels", {})
    rates = data.get("rates", {})
    for side in ("F", "L"):
        if side not in kernels:
            raise ConfigError(f"kernels.{side} is required")
        if side not in rates:
            raise ConfigError(f"rates.{side} is required")
    time_sec = data.get("time", {})
    record_every = int(time_sec.get("record_every", 0)) or None
    try:
        return MacroConfig(
            x_min=float(_need(data, "domain", "x_min")),
            x_max=float(_need(data, "domain", "x_max")),
            n_cells=int(_need(data, "domain", "n_cells")),
            dt=float(_need(data, "time", "dt")),
            t_final=float(_need(data, "time", "t_final")),
            kernel_F=kernel_from_dict(kernels["F"], "kernels.F"),
            kernel_L=kernel_from_dict(kernels["L"], "kernels.L"),
            rate_F=rate_from_dict(rates["F"], "rates.F"),
            rate_L=rate_from_dict(rates["L"], "rates.L"),
            initial=initial_from_dict(data.get("initial", {})),
            cfl_limit=float(data.get("numerics", {}).get("cfl_limit", 0.9)),
            record_every=record_every,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def micro_from_dict(data: dict, macro: MacroConfig) -> MicroConfig:
    micro = data.get("micro", {})
    known = {"n_particles", "seed", "sampling", "n_cells"}
    for key in micro:
        if key not in known:
            raise ConfigError(f"micro.{key}: unknown key")
    try:
        return MicroConfig(
            n_particles=int(micro.get("n_particles", 800)),
            dt=macro.dt,
            t_final=macro.t_final,
            kernel_F=macro.kernel_F,
            kernel_L=macro.kernel_L,
            rate_F=macro.rate_F,
            rate_L=macro.rate_L,
            initial=macro.initial,
            seed=int(micro.get("seed", 0)),
            x_min=macro.x_min,
            x_max=macro.x_max,
            n_cells=int(micro.get("n_cells", macro.n_cells)),
            sampling=str(micro.get("sampling", "quota")),
            record_every=macro.record_every,
        )
    except ValueError as exc:
        raise ConfigError(f"micro: {exc}") from exc


def micro_to_dict(cfg: MicroConfig) -> dict:
    return {
        "n_particles": cfg.n_particles,
        "seed": cfg.seed,
        "sampling": cfg.sampling,
        "n_cells": cfg.n_cells,
    }


# ---------------------------------------------------------------------------
# files and overrides
# ---------------------------------------------------------------------------
def load_config_file(path: Path) -> dict:
    """Read a TOML config or a JSON manifest (resolved config under "config")."""
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".json":
        with open(path) as fh:
            payload = json.load(fh)
        if "config" in payload:
            return payload["config"]
        return payload
    with open(path, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc


def parse_override(text: str):
    """Parse one ``--set section.key=value`` item into (path tuple, value)."""
    if "=" not in text:
        raise ConfigError(f"--set needs key=value, got {text!r}")
    key, raw = text.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError(f"--set needs a nonempty key in {text!r}")
    raw = raw.strip()
    value: object
    if raw.lower() in ("true", "false"):
        value = raw.lower() == "true"
    else:
        try:
            value = int(raw)
        except ValueError:
            try:
                value = float(raw)
            except ValueError:
                value = raw
    return tuple(key.split(".")), value


def apply_override(config: dict, path_keys, value):
    node = config
    for key in path_keys[:-1]:
        if key not in node or not isinstance(node[key], dict):
            node[key] = {}
        node = node[key]
    node[path_keys[-1]] = value


def build_manifest(
    command: str,
    config: dict,
    preset: Optional[str],
    overrides,
    extra: Optional[dict] = None,
) -> dict:
    payload = {
        "tool": "leadfollow",
        "version": __version__,
        "command": command,
        "preset": preset,
        "overrides": list(overrides),
        "config": config,
    }
    if extra:
        payload.update(extra)
    return payload
