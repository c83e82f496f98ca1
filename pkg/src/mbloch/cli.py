"""Command-line front end: JSON configs in, CSV/JSON data files out.

A config is a JSON object::

    {"command": "profile",
     "params": {...},
     "output": {"path": "out.csv", "format": "csv"},
     "seed": 0}

``sweep`` configs add ``"target"`` (the command to repeat) and an axis
``{"param_path": "medium.d0", "start": 0, "stop": 1, "n": 11, "scale": "linear"}``.
Run ``mbloch --help`` for the flags.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from copy import deepcopy
from dataclasses import dataclass

import numpy as np

from . import amplifier, bloch, lorenz, multimode, params, ring
from .errors import IntegrationError, PhysicalRegimeError
from .ode import write_csv

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_REGIME = 0, 2, 3, 4
COMMANDS = ("pumpmap", "amplify", "profile", "modes", "lase", "lorenz", "sweep")


class ConfigError(ValueError):
    def __init__(self, message, path=()):
        super().__init__(message)
        self.path = tuple(path)


@dataclass(frozen=True)
class Diagnostic:
    path: str
    line: int | None
    message: str
    severity: str = "error"

    def __str__(self):
        where = f"line {self.line}: " if self.line else ""
        loc = f"{self.path}: " if self.path else ""
        return f"{self.severity}: {where}{loc}{self.message}"


@dataclass(frozen=True)
class Table:
    header: list
    rows: list


# ---------------------------------------------------------------- schema

@dataclass(frozen=True)
class F:
    """Schema field: kind in number/int/enum/object/list/numbers/pair; ``lo``/``hi`` bounds."""

    kind: str = "number"
    default: object = None
    required: bool = False
    lo: float | None = None
    hi: float | None = None
    lo_open: bool = False
    choices: tuple = ()
    fields: dict | None = None
    note: str = ""


MEDIUM = {
    "gamma_perp": F(required=True, lo=0, lo_open=True),
    "gamma_par": F(required=True, lo=0, lo_open=True),
    "g": F(default=0.0),
    "d0": F(default=0.0, lo=-1, hi=1, note="MediumParams requires |d0| <= 1"),
    "delta": F(default=0.0),
}
CAVITY = {
    "R2": F(required=True, lo=0, hi=1, lo_open=True, note="CavityParams requires 0 < R^2 <= 1"),
    "L_m": F(required=True, lo=0, lo_open=True),
    "L_c": F(required=True, lo=0, lo_open=True),
    "c": F(default=1.0, lo=0, lo_open=True),
}
SINGLE = {
    "kappa": F(required=True, lo=0),
    "gamma_perp": F(default=1.0, lo=0, lo_open=True),
    "gamma_par": F(required=True, lo=0),
    "r": F(required=True, lo=0),
    "Delta_c": F(default=0.0),
}
SCHEMAS = {
    "pumpmap": {
        "start": F(default=0.0, lo=0), "stop": F(default=10.0, lo=0),
        "n": F("int", default=101, lo=2),
        "method": F("enum", default="mapped", choices=("mapped", "full")),
        "dominance": F(default=1e4, lo=1), "t_end": F(default=50.0, lo=0, lo_open=True),
        "tol": F(default=1e-10, lo=0, lo_open=True),
    },
    "amplify": {
        "mode": F("enum", default="exact", choices=("exact", "implicit", "weak", "strong", "bloch")),
        "medium": F("object", required=True, fields=MEDIUM),
        "c": F(default=1.0, lo=0, lo_open=True),
        "alpha0": F("pair", required=True),
        "z_end": F(default=10.0, lo=0, lo_open=True),
        "n_points": F("int", default=201, lo=2),
        "t_end": F(default=20.0, lo=0, lo_open=True),
        "tol": F(default=1e-10, lo=0, lo_open=True),
    },
    "profile": {
        "medium": F("object", required=True, fields=MEDIUM),
        "cavity": F("object", required=True, fields={**CAVITY, "R2": F("numbers", required=True, lo=0, hi=1,
                                                                            lo_open=True, note=CAVITY["R2"].note)}),
        "r": F(lo=0), "Delta": F(default=0.0),
        "n_points": F("int", default=201, lo=2),
    },
    "modes": {
        "kind": F("enum", default="family", choices=("family", "empty_cavity", "decompose")),
        "medium": F("object", fields=MEDIUM), "cavity": F("object", fields=CAVITY),
        "omega_c": F(default=0.0), "omega_21": F(default=0.0),
        "n_min": F("int", default=-2), "n_max": F("int", default=2),
        "n_z": F("int", default=multimode.DEFAULT_NZ, lo=2),
        "field_modes": F("list", default=[[0, 1.0, 0.0]]),
    },
    "lase": {
        "kind": F("enum", default="operating_point", choices=("operating_point", "traveling_wave")),
        "medium": F("object", fields=MEDIUM), "cavity": F("object", fields=CAVITY),
        "single_mode": F("object", fields=SINGLE),
        "r": F(lo=0), "Delta": F(default=0.0),
        "n_z": F("int", default=multimode.DEFAULT_NZ, lo=2),
        "t_end": F(default=10.0, lo=0, lo_open=True),
        "n_samples": F("int", default=101, lo=2),
        "tol": F(default=1e-9, lo=0, lo_open=True),
        "F0": F("pair", default=[1.0, 0.0]), "P0": F("pair", default=[0.0, 0.0]),
        "D0": F(default=None), "noise": F(default=0.0, lo=0),
    },
    "lorenz": {
        "kind": F("enum", default="trajectory",
                  choices=("trajectory", "complex", "xyz", "fixed_points", "stability",
                           "lyapunov", "hopf", "three_level_ratio")),
        "single_mode": F("object", fields=SINGLE),
        "state0": F("list", default=[1.0, 1.0, 1.0]),
        "t_end": F(default=50.0, lo=0, lo_open=True),
        "n_samples": F("int", default=2001, lo=2),
        "tol": F(default=1e-10, lo=0, lo_open=True),
        "t_total": F(default=5000.0, lo=0, lo_open=True),
        "t_transient": F(default=1000.0, lo=0),
        "G": F(default=100.0), "r_on": F(default=1.0), "r_HB": F(default=9.0),
    },
}
SWEEP_AXIS = {
    "param_path": F("string", required=True),
    "start": F(required=True), "stop": F(required=True),
    "n": F("int", required=True, lo=2),
    "scale": F("enum", default="linear", choices=("linear", "log")),
}


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _check_value(value, rule: F, path, out):
    def err(msg):
        out.append((path, msg))

    if rule.kind in ("number", "int"):
        if not _is_number(value) or (rule.kind == "int" and not float(value).is_integer()):
            return err(f"expected {'an integer' if rule.kind == 'int' else 'a number'}, got {value!r}")
        _check_range(value, rule, err)
    elif rule.kind == "numbers":
        vals = value if isinstance(value, list) else [value]
        if not vals or not all(_is_number(v) for v in vals):
            return err("expected a number or a list of numbers")
        for v in vals:
            _check_range(v, rule, err)
    elif rule.kind == "pair":
        ok = _is_number(value) or (isinstance(value, list) and len(value) == 2
                                   and all(_is_number(v) for v in value))
        if not ok:
            err("expected a number or [re, im]")
    elif rule.kind == "enum":
        if value not in rule.choices:
            err(f"must be one of {', '.join(rule.choices)}")
    elif rule.kind == "string":
        if not isinstance(value, str):
            err("expected a string")
    elif rule.kind == "list":
        if not isinstance(value, list):
            err("expected a list")
    elif rule.kind == "object":
        if not isinstance(value, dict):
            return err("expected an object")
        _check_object(value, rule.fields, path, out)


def _check_range(v, rule, err):
    lo_bad = rule.lo is not None and (v <= rule.lo if rule.lo_open else v < rule.lo)
    hi_bad = rule.hi is not None and v > rule.hi
    if lo_bad or hi_bad or not math.isfinite(v):
        lo = "-inf" if rule.lo is None else f"{rule.lo:g}"
        hi = "inf" if rule.hi is None else f"{rule.hi:g}"
        bracket = f"{'(' if rule.lo_open or rule.lo is None else '['}{lo}, {hi}]"
        extra = f" ({rule.note})" if rule.note else ""
        err(f"value {v!r} outside {bracket}{extra}")


def _check_object(obj, schema, path, out):
    for key in obj:
        if key not in schema:
            out.append((path + (key,), f"unknown parameter '{key}'"))
    for key, rule in schema.items():
        if key in obj:
            if obj[key] is not None or rule.default is not None:
                _check_value(obj[key], rule, path + (key,), out)
        elif rule.required:
            out.append((path + (key,), "missing required parameter"))


def _fill(obj, schema):
    res = {}
    for key, rule in schema.items():
        if key in obj:
            val = obj[key]
            res[key] = _fill(val, rule.fields) if rule.kind == "object" and val is not None else val
        else:
            res[key] = deepcopy(rule.default)
    return res


def _locate(text, path):
    """Best-effort source line of a JSON path (keys searched in nesting order)."""
    if text is None:
        return None
    pos = 0
    found = False
    for key in path:
        if isinstance(key, int):
            continue
        idx = text.find(f'"{key}"', pos)
        if idx < 0:
            break
        pos, found = idx, True
    return text.count("\n", 0, pos) + 1 if found else 1


def _semantic(command, p, out, warn):
    """Cross-field checks that the schema cannot express."""
    if command == "pumpmap" and p["stop"] < p["start"]:
        out.append((("params", "stop"), "stop must not be smaller than start"))
    if command in ("profile", "lase", "modes"):
        needs = {"profile": ("medium", "cavity"), "modes": (), "lase": ()}[command]
        if command == "modes" and p["kind"] in ("family", "empty_cavity"):
            needs = ("medium", "cavity") if p["kind"] == "family" else ("cavity",)
        if command == "lase":
            needs = ("medium", "cavity") if p["kind"] == "operating_point" else ("single_mode", "cavity")
        for key in needs:
            if p.get(key) is None:
                out.append((("params", key), f"required for {command} {p.get('kind', '')}".rstrip()))
    cav = p.get("cavity")
    if isinstance(cav, dict) and _is_number(cav.get("L_m")) and _is_number(cav.get("L_c")):
        if cav["L_m"] > cav["L_c"]:
            out.append((("params", "cavity", "L_m"), "L_m must not exceed L_c (CavityParams invariant)"))
    if command == "lase" and p["kind"] == "traveling_wave":
        n = p["n_z"]
        if _is_number(n) and n >= 1 and n & (n - 1):
            out.append((("params", "n_z"), f"n_z must be a power of two; try {1 << (int(n) - 1).bit_length()}"))
    if command == "modes" and p["kind"] == "decompose":
        n = p["n_z"]
        if _is_number(n) and n >= 1 and n & (n - 1):
            out.append((("params", "n_z"), f"n_z must be a power of two; try {1 << (int(n) - 1).bit_length()}"))
    if command == "lorenz":
        sm = p.get("single_mode")
        if sm is None and p["kind"] != "three_level_ratio":
            out.append((("params", "single_mode"), "required for lorenz"))
        elif sm is not None and all(_is_number(sm.get(k)) for k in ("kappa", "gamma_par", "r")):
            gp = sm.get("gamma_perp", 1.0)
            if _is_number(gp) and gp > 0 and sm["kappa"] < gp + sm["gamma_par"] and sm["r"] > 9:
                warn((("params", "single_mode", "kappa"),
                      "stationary solution stable; no pulsing expected (kappa < gamma_perp + gamma_par)"))
        if p["kind"] == "three_level_ratio" and _is_number(p["G"]) and p["G"] <= p["r_HB"]:
            out.append((("params", "G"), "instability unreachable: need G > r_HB"))


def validate(config, text=None):
    """Diagnostics for ``config``; the config is runnable iff none has severity 'error'."""
    errors, warns = [], []
    if not isinstance(config, dict) or not config:
        return [Diagnostic("command", _locate(text, ()), "missing command")]
    known = {"command", "params", "output", "seed", "target", "sweep"}
    for key in config:
        if key not in known:
            errors.append(((key,), f"unknown top-level key '{key}'"))
    command = config.get("command")
    if command is None:
        errors.append((("command",), "missing command"))
    elif command not in COMMANDS:
        errors.append((("command",), f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}"))
    seed = config.get("seed", 0)
    if not (isinstance(seed, int) and not isinstance(seed, bool) and 0 <= seed < 2 ** 64):
        errors.append((("seed",), "seed must be an integer in [0, 2^64)"))
    output = config.get("output", {})
    if not isinstance(output, dict):
        errors.append((("output",), "expected an object"))
    else:
        _check_object(output, {"path": F("string"), "format": F("enum", choices=("csv", "json"))},
                      ("output",), errors)
    target = command
    if command == "sweep":
        target = config.get("target")
        if target not in SCHEMAS:
            errors.append((("target",), f"sweep target must be one of {', '.join(SCHEMAS)}"))
            target = None
        axis = config.get("sweep")
        if not isinstance(axis, dict):
            errors.append((("sweep",), "missing sweep axis"))
        else:
            _check_object(axis, SWEEP_AXIS, ("sweep",), errors)
            if axis.get("scale") == "log" and _is_number(axis.get("start")) and _is_number(axis.get("stop")) \
                    and min(axis["start"], axis["stop"]) <= 0:
                errors.append((("sweep", "start"), "log sweep needs positive start and stop"))
            if target and isinstance(axis.get("param_path"), str):
                path = axis["param_path"].split(".")
                if path[0] == "params":
                    path = path[1:]
                if not _schema_has(SCHEMAS[target], path):
                    errors.append((("sweep", "param_path"),
                                   f"'{axis['param_path']}' is not a parameter of {target}"))
    elif "sweep" in config or "target" in config:
        errors.append((("sweep",), "sweep axis given for a non-sweep command"))
    if target in SCHEMAS:
        raw = config.get("params", {})
        if not isinstance(raw, dict):
            errors.append((("params",), "expected an object"))
        else:
            before = len(errors)
            _check_object(raw, SCHEMAS[target], ("params",), errors)
            if len(errors) == before:
                _semantic(target, _fill(raw, SCHEMAS[target]), errors, warns.append)
    diags = [Diagnostic(".".join(map(str, p)), _locate(text, p), m) for p, m in errors]
    diags += [Diagnostic(".".join(map(str, p)), _locate(text, p), m, "warning") for p, m in warns]
    return diags


def _schema_has(schema, path):
    if not path or path[0] not in schema:
        return False
    rule = schema[path[0]]
    if len(path) == 1:
        return rule.kind in ("number", "int", "numbers")
    return rule.kind == "object" and _schema_has(rule.fields, path[1:])


# ---------------------------------------------------------------- builders

def _medium(d):
    return params.MediumParams(d["gamma_perp"], d["gamma_par"], d["g"], d["d0"], d["delta"])


def _cavity(d, R2=None):
    return params.CavityParams.from_power_reflectivity(d["R2"] if R2 is None else R2,
                                                       d["L_m"], d["L_c"], d["c"])


def _single(d):
    return lorenz.SingleModeParams(d["kappa"], d["gamma_perp"], d["gamma_par"], d["r"], d["Delta_c"])


def _complex(x):
    return complex(x) if _is_number(x) else complex(x[0], x[1])


# ---------------------------------------------------------------- commands

def cmd_pumpmap(p, seed):
    x = np.linspace(p["start"], p["stop"], p["n"])
    header = ["R_over_gamma", "d0_three_level", "d0_four_level"]
    cols = [x, params.three_level_d0(x), params.four_level_d0(x)]
    if p["method"] == "full":
        header += ["d_full_three_level", "d_full_four_level",
                   "gamma_par_eff_three_level", "gamma_par_eff_four_level"]
        three = np.array([_full_inversion(v, 3, p) for v in x]).reshape(-1, 2)
        four = np.array([_full_inversion(v, 4, p) for v in x]).reshape(-1, 2)
        cols += [three[:, 0], four[:, 0], three[:, 1], four[:, 1]]
    return Table(header, list(zip(*cols)))


def _full_inversion(R, levels, p):
    """Inversion of the full level scheme after ``t_end`` with no field (gamma = 1),
    paired with the effective gamma_par of the reduced two-level medium."""
    big = p["dominance"] * max(1.0, R)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if levels == 3:
            lp = params.ThreeLevelParams(1.0, 0.0, big, 1.0, R)
            s0 = bloch.ThreeLevelState(1.0, 0.0, 0.0, 0j)
            traj = bloch.integrate_three_level(s0, 0j, lp, 0.0, p["t_end"], p["tol"], n_samples=2)
            reduced = params.map_three_level(lp)
        else:
            lp = params.FourLevelParams(big, 0.0, 1.0, 0.0, 0.0, big, 1.0, R)
            s0 = bloch.FourLevelState(1.0, 0.0, 0.0, 0.0, 0j)
            traj = bloch.integrate_four_level(s0, 0j, lp, 0.0, p["t_end"], p["tol"], n_samples=2)
            reduced = params.map_four_level(lp)
    return float(bloch.inversion(traj)[-1]), reduced.gamma_par


def cmd_amplify(p, seed):
    m = _medium(p["medium"])
    c = p["c"]
    alpha0 = _complex(p["alpha0"])
    z = np.linspace(0.0, p["z_end"], p["n_points"])
    mode = p["mode"]
    if mode == "bloch":
        traj = bloch.integrate_two_level(bloch.TwoLevelState(m.d0, 0j), alpha0, m, p["t_end"], p["tol"],
                                         n_samples=p["n_points"])
        return Table(["t", *traj.columns], [list(r) for r in np.column_stack([traj.t, traj.y])])
    if mode == "implicit":
        mag = amplifier.solve_implicit(abs(alpha0), m, c, z)
        return Table(["z", "amp", "amp2"], list(zip(z, mag, mag ** 2)))
    if mode == "weak":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            a = amplifier.weak_field(alpha0, m, c, z)
        return Table(["z", "amp2", "phase"], list(zip(z, np.abs(a) ** 2, np.angle(a))))
    if mode == "strong":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            i = amplifier.strong_field(abs(alpha0) ** 2, m, c, z)
        return Table(["z", "amp2"], list(zip(z, i)))
    res = amplifier.propagate_exact(alpha0, m, c, p["z_end"], p["n_points"], tol=p["tol"])
    a = m.small_signal_gain(c)
    zpd = 1.0 / abs(a) if a != 0 else math.nan
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        weak = np.abs(amplifier.weak_field(alpha0, m, c, z)) ** 2
        strong = amplifier.strong_field(abs(alpha0) ** 2, m, c, z)
    isat = m.saturation_intensity
    rows = zip(z, z / zpd, res.amp2, res.amp2 / isat, weak / isat, strong / isat, res.phase,
               res.regime_tags)
    return Table(["z", "z_over_zpd", "amp2", "amp2_over_isat", "weak_over_isat", "strong_over_isat",
                  "phase", "regime"], list(rows))


def cmd_profile(p, seed):
    m = _medium(p["medium"])
    R2s = p["cavity"]["R2"] if isinstance(p["cavity"]["R2"], list) else [p["cavity"]["R2"]]
    cols, header = [], ["z_over_Lm"]
    for R2 in R2s:
        cav = _cavity(p["cavity"], R2)
        r = p["r"] if p["r"] is not None else params.effective_pump_r(m, cav)
        z, i = ring.intensity_profile(r, p["Delta"], m, cav, p["n_points"])
        cols.append(i / m.saturation_intensity)
        header.append(f"amp2_over_isat_R2={R2:g}")
    return Table(header, list(zip(z / cav.L_m, *cols)))


def cmd_modes(p, seed):
    kind = p["kind"]
    if kind == "empty_cavity":
        cav = _cavity(p["cavity"])
        ms = range(p["n_min"], p["n_max"] + 1)
        return Table(["m", "omega_m", "k_m"],
                     [(m, w, w / cav.c) for m, w in zip(ms, multimode.empty_cavity_frequencies(cav, ms))])
    if kind == "decompose":
        n = p["n_z"]
        L_m = p["cavity"]["L_m"] if p.get("cavity") else 1.0
        cav = _cavity(p["cavity"]) if p.get("cavity") else None
        z = multimode.grid(n, L_m)
        samples = np.zeros(n, dtype=complex)
        for mode in p["field_modes"]:
            samples += complex(mode[1], mode[2]) * np.exp(2j * np.pi * mode[0] * z / L_m)
        field = multimode.FieldOnRing.for_cavity(samples, cav) if cav else \
            multimode.FieldOnRing(samples, L_m, 1.0)
        rule = multimode.mode_decompose(field)
        return Table(["m", "re_F_m", "im_F_m", "omega_m"],
                     list(zip(rule.m, rule.coefficients.real, rule.coefficients.imag, rule.omega)))
    m = _medium(p["medium"])
    cav = _cavity(p["cavity"])
    fam = ring.mode_family(m, cav, p["omega_c"], p["omega_21"], range(p["n_min"], p["n_max"] + 1))
    return [pt.as_dict() for pt in fam]


def cmd_lase(p, seed):
    if p["kind"] == "traveling_wave":
        sm = _single(p["single_mode"])
        cav = _cavity(p["cavity"])
        n = p["n_z"]
        rng = np.random.default_rng(seed)
        F0 = _complex(p["F0"]) + p["noise"] * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        D0 = sm.r if p["D0"] is None else p["D0"]
        res = multimode.integrate_traveling_wave(multimode.FieldOnRing.for_cavity(F0, cav),
                                                 _complex(p["P0"]), D0, sm, p["t_end"], p["tol"],
                                                 n_samples=p["n_samples"])
        n_z = len(res.z)
        header = ["t"] + [f"re_F_{j}" for j in range(n_z)] + [f"im_F_{j}" for j in range(n_z)]
        return Table(header, [[t, *f.real, *f.imag] for t, f in zip(res.t, res.F)])
    m = _medium(p["medium"])
    cav = _cavity(p["cavity"])
    r = p["r"] if p["r"] is not None else params.effective_pump_r(m, cav)
    Delta = p["Delta"]
    if r < ring.lasing_threshold(Delta):
        raise PhysicalRegimeError(f"r = {r:.6g} is below the lasing threshold "
                                  f"{ring.lasing_threshold(Delta):.6g}")
    return {"r": r, "Delta": Delta, "r_on": ring.lasing_threshold(Delta),
            "exit_intensity": ring.exit_intensity(r, Delta, m, cav),
            "output_slope": ring.output_slope(m, cav), "kappa": cav.kappa}


def cmd_lorenz(p, seed):
    kind = p["kind"]
    if kind == "three_level_ratio":
        return {"G": p["G"], "ratio": lorenz.three_level_instability_ratio(p["G"], p["r_on"], p["r_HB"])}
    sm = _single(p["single_mode"])
    if kind == "hopf":
        h = lorenz.hopf_threshold(sm)
        return {"r_HB": h.r_hb if h.finite else None, "status": h.status, "bad_cavity": h.bad_cavity,
                "r_min": h.r_min, "kappa_at_min": h.kappa_at_min}
    if kind == "fixed_points":
        return [{"E": q.E, "P": q.P, "D": q.D} for q in lorenz.fixed_points(sm)]
    if kind == "stability":
        return [lorenz.jacobian_stability(sm, q).as_dict() for q in lorenz.fixed_points(sm)]
    if kind == "lyapunov":
        lam = lorenz.lyapunov_max(sm, p["state0"], p["t_total"], p["t_transient"], tol=p["tol"], seed=seed)
        return {"lambda_max": lam, "seed": seed, "t_total": p["t_total"], "t_transient": p["t_transient"]}
    t_eval = np.linspace(0.0, p["t_end"], p["n_samples"])
    if kind == "complex":
        s = p["state0"]
        state = lorenz.ComplexModeState(_complex(s[0]), _complex(s[1]), s[2])
        traj = lorenz.integrate_complex(state, sm, p["t_end"], p["tol"], t_eval=t_eval)
    elif kind == "xyz":
        sigma, b, r = lorenz.to_lorenz_coordinates(sm)
        traj = lorenz.integrate_lorenz_xyz(p["state0"], sigma, b, r, p["t_end"] * sm.gamma_perp, p["tol"],
                                           tau_eval=t_eval * sm.gamma_perp)
        return Table(["tau", *traj.columns], [list(r) for r in np.column_stack([traj.t, traj.y])])
    else:
        traj = lorenz.integrate_real(p["state0"], sm, p["t_end"], p["tol"], t_eval=t_eval)
    tau = traj.t * sm.gamma_perp
    return Table(["tau", *traj.columns], [list(r) for r in np.column_stack([tau, traj.y])])


HANDLERS = {"pumpmap": cmd_pumpmap, "amplify": cmd_amplify, "profile": cmd_profile,
            "modes": cmd_modes, "lase": cmd_lase, "lorenz": cmd_lorenz}


def _axis_values(axis):
    if axis.get("scale", "linear") == "log":
        return np.geomspace(axis["start"], axis["stop"], axis["n"])
    return np.linspace(axis["start"], axis["stop"], axis["n"])


def _set_path(d, path, value):
    for key in path[:-1]:
        d = d.setdefault(key, {})
    d[path[-1]] = value


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}.{i}" if prefix else str(i))
    else:
        yield prefix, obj


def run_sweep(config, seed, threads):
    axis = config["sweep"]
    target = config["target"]
    path = axis["param_path"].split(".")
    if path[0] == "params":
        path = path[1:]
    values = _axis_values(axis)
    base = config.get("params", {})

    def point(i):
        local = deepcopy(base)
        _set_path(local, path, float(values[i]))
        return _execute(target, local, seed)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(point, range(len(values))))
    label = axis["param_path"]
    if all(isinstance(r, Table) for r in results):
        header = ["index", label, *results[0].header]
        rows = [[i, values[i], *row] for i, r in enumerate(results) for row in r.rows]
        return Table(header, rows)
    flat = [dict(_flatten(r)) for r in results]
    keys = list(flat[0])
    return Table(["index", label, *keys], [[i, values[i], *(f.get(k) for k in keys)]
                                            for i, f in enumerate(flat)])


def _execute(command, raw_params, seed):
    diags = [d for d in validate({"command": command, "params": raw_params}) if d.severity == "error"]
    if diags:
        raise ConfigError("; ".join(str(d) for d in diags))
    return HANDLERS[command](_fill(raw_params, SCHEMAS[command]), seed)


# ---------------------------------------------------------------- output

def _json_ready(obj):
    if isinstance(obj, Table):
        return {"columns": obj.header, "rows": [[_json_ready(v) for v in row] for row in obj.rows]}
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def render(result, fmt):
    """Serialise a command result to text (CSV with 17 digits or shortest round-trip JSON)."""
    if fmt == "json":
        return json.dumps(_json_ready(result), indent=1) + "\n"
    buf = io.StringIO()
    if isinstance(result, Table):
        write_csv(buf, result.header, result.rows)
    elif isinstance(result, list) and result and all(isinstance(r, dict) for r in result):
        flat = [dict(_flatten(r)) for r in result]
        keys = list(flat[0])
        write_csv(buf, keys, [[f.get(k) for k in keys] for f in flat])
    else:
        write_csv(buf, ["key", "value"], list(_flatten(result)))
    return buf.getvalue()


def run(config, *, out=None, fmt=None, threads=None, seed=None, text=None):
    """Validate and execute ``config``; returns (exit_code, rendered_text, diagnostics)."""
    diags = validate(config, text)
    if any(d.severity == "error" for d in diags):
        return EXIT_CONFIG, None, diags
    output = config.get("output", {})
    fmt = fmt or output.get("format", "csv")
    seed = config.get("seed", 0) if seed is None else seed
    if threads is None:
        threads = int(os.environ.get("MBLOCH_THREADS", "1") or 1)
    try:
        if config["command"] == "sweep":
            result = run_sweep(config, seed, threads)
        else:
            result = HANDLERS[config["command"]](_fill(config.get("params", {}),
                                                       SCHEMAS[config["command"]]), seed)
    except PhysicalRegimeError as exc:
        return EXIT_REGIME, None, diags + [Diagnostic("", None, f"physical regime: {exc}")]
    except (IntegrationError, RuntimeError, ArithmeticError) as exc:
        return EXIT_SOLVER, None, diags + [Diagnostic("", None, f"solver: {exc}")]
    except ValueError as exc:
        return EXIT_CONFIG, None, diags + [Diagnostic("", None, str(exc))]
    text_out = render(result, fmt)
    path = out or output.get("path")
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text_out)
    return EXIT_OK, text_out, diags


def load_config(path):
    with open(path) as fh:
        text = fh.read()
    try:
        return json.loads(text), text
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}: invalid JSON: {exc.msg}") from exc


def _parser():
    ap = argparse.ArgumentParser(prog="mbloch", description="Maxwell-Bloch laser model solvers.")
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", help="output file (default: config output.path, else stdout)")
    ap.add_argument("--format", choices=("csv", "json"), help="output format")
    ap.add_argument("--threads", type=int, help="sweep worker threads (fallback: MBLOCH_THREADS)")
    ap.add_argument("--seed", type=int, help="random seed (overrides the config)")
    ap.add_argument("--validate-only", action="store_true", help="only print diagnostics")
    return ap


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        config, text = load_config(args.config)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        print("error: --seed must be in [0, 2^64)", file=sys.stderr)
        return EXIT_CONFIG
    if args.validate_only:
        diags = validate(config, text)
        for d in diags:
            print(d, file=sys.stderr)
        return EXIT_CONFIG if any(d.severity == "error" for d in diags) else EXIT_OK
    code, text_out, diags = run(config, out=args.out, fmt=args.format, threads=args.threads,
                                seed=args.seed, text=text)
    for d in diags:
        print(d, file=sys.stderr)
    if code == EXIT_OK and not (args.out or config.get("output", {}).get("path")):
        sys.stdout.write(text_out)
    return code


if __name__ == "__main__":
    sys.exit(main())
