"""Run configuration: a single JSON file merged over bundled defaults.

Validation is strict: unknown keys are rejected with path-qualified
messages, and record-like nodes (an area, the CDM gain triple, a PID gain
set, a load profile) must be complete when supplied. Everything not
supplied falls back to the bundled benchmark values.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from typing import Any, Optional

from . import defaults
from .cdm import CdmGains
from .errors import ConfigError
from .plant import AreaParams, NonlinearityConfig, TieLine
from .sim import IntegralSpec, PidSpec
from .wca import WcaConfig


def default_config() -> dict:
    return {
        "model": {
            "area1": {"D": 0.015, "M": 0.1667, "R": 3.0, "Tg": 0.08, "Tt": 0.4},
            "area2": {"D": 0.016, "M": 0.2017, "R": 2.73, "Tg": 0.06, "Tt": 0.44},
            "tie": {"T12": 0.2},
            "nonlinear": {
                "grc_rate": defaults.GRC_STATED,
                "gdb_width": 0.05,
                "gdb_mode": "deadzone",
            },
        },
        "controllers": {
            "cdm_opt": {
                "gamma": list(defaults.OPT_GAMMA),
                "tau": defaults.OPT_TAU,
                "k_b0": list(defaults.OPT_KB0),
            },
            "cdm_classic": {
                "ac": [list(p.coeffs) for p in defaults.CLASSIC_AC],
                "bc": [list(p.coeffs) for p in defaults.CLASSIC_BC],
            },
            "pid": [
                {"kp": g[0], "ki": g[1], "kd": g[2], "tf": defaults.PID_FILTER_TF}
                for g in defaults.PID_GAINS
            ],
            "integral": list(defaults.INTEGRAL_GAINS),
        },
        "solver": {
            "dt": defaults.DT_DEFAULT,
            "controller_dt": defaults.CONTROLLER_DT_DEFAULT,
            "horizon": None,
        },
        "cases": {
            "seed": defaults.CASE_SEED,
            "nonlinear": {
                "grc_rate": defaults.GRC_NONBINDING,
                "gdb_width": 0.05,
                "gdb_mode": "deadzone",
            },
        },
        "optimizer": {
            "n_pop": 50,
            "max_it": 50,
            "n_sr": 4,
            "d_max0": 1e-16,
            "c": 2.0,
            "seed": 0,
            "fitness_inverted": False,
            "bounds": {"gamma": [0.01, 40.0], "tau": [0.1, 5.0], "k_b0": [1.0, 100.0]},
            "objective": {
                "dt": defaults.OBJECTIVE_DT,
                "horizon": defaults.OBJECTIVE_HORIZON,
                "perturb": 1.5,
                "grc_rate": defaults.NONLIN_OBJECTIVE.grc_rate,
                "gdb_width": defaults.NONLIN_OBJECTIVE.gdb_width,
                "gdb_mode": defaults.NONLIN_OBJECTIVE.gdb_mode,
            },
        },
        "scenario": {
            "loads": [{"kind": "step", "magnitude": 0.01, "time": 1.0}, None],
            "horizon": 60.0,
            "disturbance_time": 1.0,
        },
    }


# schema tree: dict of allowed keys, "*" marks record nodes validated whole
_RECORD_PATHS = {
    "model.area1",
    "model.area2",
    "model.tie",
    "controllers.cdm_opt",
    "controllers.cdm_classic",
    "controllers.pid",
    "controllers.integral",
    "scenario.loads",
    "optimizer.bounds",
}

_REQUIRED_RECORD_KEYS = {
    "model.area1": {"D", "M", "R", "Tg", "Tt"},
    "model.area2": {"D", "M", "R", "Tg", "Tt"},
    "model.tie": {"T12"},
    "controllers.cdm_opt": {"gamma", "tau", "k_b0"},
    "controllers.cdm_classic": {"ac", "bc"},
    "optimizer.bounds": {"gamma", "tau", "k_b0"},
}


def _allowed_keys(defaults_node: dict) -> set:
    return set(defaults_node.keys())


def _merge(base: Any, user: Any, path: str) -> Any:
    if path in _RECORD_PATHS:
        required = _REQUIRED_RECORD_KEYS.get(path)
        if required is not None:
            if not isinstance(user, dict):
                raise ConfigError(path, f"expected an object with keys {sorted(required)}")
            missing = required - set(user.keys())
            if missing:
                raise ConfigError(f"{path}.{sorted(missing)[0]}", "missing required field")
            unknown = set(user.keys()) - required
            if unknown:
                raise ConfigError(f"{path}.{sorted(unknown)[0]}", "unknown key")
        return copy.deepcopy(user)
    if isinstance(base, dict):
        if not isinstance(user, dict):
            raise ConfigError(path, "expected an object")
        unknown = set(user.keys()) - _allowed_keys(base)
        if unknown:
            raise ConfigError(f"{path}.{sorted(unknown)[0]}" if path else sorted(unknown)[0], "unknown key")
        merged = {}
        for key, value in base.items():
            child = f"{path}.{key}" if path else key
            merged[key] = _merge(value, user[key], child) if key in user else copy.deepcopy(value)
        return merged
    return copy.deepcopy(user)


@dataclass
class RunConfig:
    raw: dict  # merged, validated config (the manifest hashes this)
    areas: tuple[AreaParams, AreaParams]
    tie: TieLine
    nonlin: NonlinearityConfig
    cases_nonlin: NonlinearityConfig
    cases_seed: int
    cdm_gains: tuple[CdmGains, CdmGains]
    classic_ac: list
    classic_bc: list
    pid: tuple[PidSpec, PidSpec]
    integral: tuple[IntegralSpec, IntegralSpec]
    dt: float
    controller_dt: float
    horizon: Optional[float]
    wca: WcaConfig
    opt_bounds: list
    objective_settings: dict
    scenario: dict

    def canonical_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))


def _nonlin_from(node: dict, path: str) -> NonlinearityConfig:
    try:
        return NonlinearityConfig(
            grc_rate=float(node["grc_rate"]),
            gdb_width=float(node["gdb_width"]),
            gdb_mode=str(node["gdb_mode"]),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from None


def _area_from(node: dict, path: str) -> AreaParams:
    try:
        return AreaParams(**{k: float(node[k]) for k in ("D", "M", "R", "Tg", "Tt")})
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from None


def build_config(user: Optional[dict] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Merge user config over defaults, apply flag overrides, validate."""
    merged = _merge(default_config(), user or {}, "")
    for dotted, value in (overrides or {}).items():
        node = merged
        parts = dotted.split(".")
        for part in parts[:-1]:
            node = node[part]
        node[parts[-1]] = value

    model = merged["model"]
    controllers = merged["controllers"]
    opt = merged["optimizer"]

    gamma = [float(g) for g in controllers["cdm_opt"]["gamma"]]
    tau = float(controllers["cdm_opt"]["tau"])
    kb0 = controllers["cdm_opt"]["k_b0"]
    if not (isinstance(kb0, list) and len(kb0) == 2):
        raise ConfigError("controllers.cdm_opt.k_b0", "expected a two-element list")
    try:
        cdm_gains = tuple(CdmGains(gamma, tau, float(k)) for k in kb0)
    except ValueError as exc:
        raise ConfigError("controllers.cdm_opt", str(exc)) from None

    pid_nodes = controllers["pid"]
    if not (isinstance(pid_nodes, list) and len(pid_nodes) == 2):
        raise ConfigError("controllers.pid", "expected a two-element list")
    pid = []
    for i, node in enumerate(pid_nodes):
        keys = {"kp", "ki", "kd", "tf"}
        if not isinstance(node, dict) or set(node.keys()) - keys:
            raise ConfigError(f"controllers.pid[{i}]", f"expected keys {sorted(keys)}")
        missing = {"kp", "ki", "kd"} - set(node.keys())
        if missing:
            raise ConfigError(f"controllers.pid[{i}].{sorted(missing)[0]}", "missing required field")
        pid.append(
            PidSpec(
                kp=float(node["kp"]),
                ki=float(node["ki"]),
                kd=float(node["kd"]),
                tf=float(node.get("tf", defaults.PID_FILTER_TF)),
            )
        )

    integral = merged["controllers"]["integral"]
    if not (isinstance(integral, list) and len(integral) == 2):
        raise ConfigError("controllers.integral", "expected a two-element list")

    bounds_node = opt["bounds"]
    for key, pair in bounds_node.items():
        if not (isinstance(pair, list) and len(pair) == 2 and pair[0] < pair[1]):
            raise ConfigError(f"optimizer.bounds.{key}", "expected [low, high] with low < high")
    opt_bounds = (
        [tuple(bounds_node["gamma"])] * 5
        + [tuple(bounds_node["tau"])]
        + [tuple(bounds_node["k_b0"])] * 2
    )

    try:
        wca = WcaConfig(
            n_pop=int(opt["n_pop"]),
            max_it=int(opt["max_it"]),
            n_sr=int(opt["n_sr"]),
            d_max0=float(opt["d_max0"]),
            c=float(opt["c"]),
            seed=int(opt["seed"]),
            fitness_inverted=bool(opt["fitness_inverted"]),
        )
    except ValueError as exc:
        raise ConfigError("optimizer", str(exc)) from None

    solver = merged["solver"]
    dt = float(solver["dt"])
    if not (0.0 < dt <= 0.05):
        raise ConfigError("solver.dt", "must be in (0, 0.05]")

    return RunConfig(
        raw=merged,
        areas=(_area_from(model["area1"], "model.area1"), _area_from(model["area2"], "model.area2")),
        tie=TieLine(T12=float(model["tie"]["T12"])),
        nonlin=_nonlin_from(model["nonlinear"], "model.nonlinear"),
        cases_nonlin=_nonlin_from(merged["cases"]["nonlinear"], "cases.nonlinear"),
        cases_seed=int(merged["cases"]["seed"]),
        cdm_gains=cdm_gains,
        classic_ac=controllers["cdm_classic"]["ac"],
        classic_bc=controllers["cdm_classic"]["bc"],
        pid=tuple(pid),
        integral=tuple(IntegralSpec(float(k)) for k in integral),
        dt=dt,
        controller_dt=float(solver["controller_dt"]),
        horizon=None if solver["horizon"] is None else float(solver["horizon"]),
        wca=wca,
        opt_bounds=opt_bounds,
        objective_settings=dict(opt["objective"]),
        scenario=merged["scenario"],
    )


def load_config(path: Optional[str], overrides: Optional[dict] = None) -> RunConfig:
    user = None
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(path, "config file not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(path, f"invalid JSON: {exc}") from None
        if not isinstance(user, dict):
            raise ConfigError(path, "top-level config must be an object")
    return build_config(user, overrides)
