"""Command-line entry point: config parsing and report serialization.

Commands: speeds, signature, basis, coercivity, solve, sweep, validate.
Exit codes: 0 success, 1 usage error (flags, config), 2 validation failure
(operator hypotheses, coercivity, sonic grids, or any numeric check raised
by the library).  Artifacts are deterministic: fixed key order, every float
printed with 12 significant digits.
"""
from __future__ import annotations

import configparser
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .collision import build_bgk_operator, validate_assumptions
from .models import (FAMILIES, MODEL_PRESETS, ModelSpec, WallState,
                     boundary_maxwellian_data, closed_form_speeds,
                     default_grid, equilibrium, wall_parameter_directions)
from .penalty import (build_penalized_operator, coercivity_check,
                      penalty_constants)
from .regimes import measure_decay, sweep_signature, uniform_decay_study
from .solver import SourceTerm, solve_halfspace
from .spectral import kernel_basis, signature
from .velocity_space import split_half_spaces

COMMANDS = ("speeds", "signature", "basis", "coercivity", "solve", "sweep",
            "validate")

_MODEL_KEYS = ("preset", "family", "dimension", "masses", "densities",
               "temperature", "quantum_sign", "cutoff_lambda",
               "energy_levels", "level_weights", "internal_dof")
_GRID_KEYS = ("nodes", "energy_nodes", "angular_nodes", "extent")
_BOUNDARY_KEYS = ("type", "coefficient")
_PENALTY_KEYS = ("eps1", "eps2")
_RUN_KEYS = ("u", "u_range", "samples", "extra_conditions", "wall_densities",
             "wall_velocity", "wall_temperature", "sources")
_OUTPUT_KEYS = ("dir", "format")
_SECTIONS = {"model": _MODEL_KEYS, "grid": _GRID_KEYS,
             "boundary": _BOUNDARY_KEYS, "penalty": _PENALTY_KEYS,
             "run": _RUN_KEYS, "output": _OUTPUT_KEYS}


class UsageError(ValueError):
    """Bad flags or bad config; exits with code 1."""


def _r12(x):
    """Round floats to 12 significant digits, recursively."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return float("%.12g" % x)
    if isinstance(x, dict):
        return {k: _r12(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_r12(v) for v in x]
    if isinstance(x, np.generic):
        return _r12(x.item())
    if isinstance(x, np.ndarray):
        return _r12(x.tolist())
    raise TypeError("cannot serialize %r" % type(x))


def _floats(text: str) -> tuple[float, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    return tuple(float(p) for p in parts)


def _nested_floats(text: str) -> tuple:
    groups = [g.strip() for g in text.split(";") if g.strip()]
    if len(groups) <= 1:
        return _floats(text)
    return tuple(_floats(g) for g in groups)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError("not a boolean: %r" % text)


@dataclass
class RunConfig:
    """Normalized run description; every command reads from here."""

    model: ModelSpec
    preset: str = ""
    nodes: int | None = None
    energy_nodes: int | None = None
    angular_nodes: int | None = None
    extent: float | None = None
    boundary_type: str = "absorb"
    coefficient: float = 0.0
    eps1: float = 0.5
    eps2: float = 0.5
    u: float | None = None
    u_range: tuple[float, float, int] | None = None
    samples: int = 41
    extra_conditions: bool = False
    wall: WallState | None = None
    sources: list[tuple[float, int, float]] = field(default_factory=list)
    out_dir: str = "."
    out_format: str = "json"

    def normalized(self) -> dict:
        m = self.model
        md = {"family": m.family, "dimension": m.dimension,
              "masses": list(m.masses), "densities": list(m.densities),
              "temperature": m.temperature}
        if m.quantum_sign:
            md["quantum_sign"] = m.quantum_sign
            md["cutoff_lambda"] = m.cutoff_lambda
        if m.energy_levels:
            md["energy_levels"] = [list(lv) if isinstance(lv, tuple) else lv
                                   for lv in m.energy_levels]
        if m.level_weights:
            md["level_weights"] = [list(lv) if isinstance(lv, tuple) else lv
                                   for lv in m.level_weights]
        if m.internal_dof:
            md["internal_dof"] = list(m.internal_dof)
        out = {"model": md,
               "grid": {"nodes": self.nodes, "energy_nodes": self.energy_nodes,
                        "angular_nodes": self.angular_nodes,
                        "extent": self.extent},
               "boundary": {"type": self.boundary_type,
                            "coefficient": self.coefficient},
               "penalty": {"eps1": self.eps1, "eps2": self.eps2},
               "run": {"u": self.u,
                       "u_range": list(self.u_range) if self.u_range else None,
                       "samples": self.samples,
                       "extra_conditions": self.extra_conditions,
                       "wall": None if self.wall is None else
                       {"densities": list(self.wall.densities),
                        "velocity": list(self.wall.velocity),
                        "temperature": self.wall.temperature},
                       "sources": [list(s) for s in self.sources]},
               "output": {"dir": self.out_dir, "format": self.out_format}}
        return _r12(out)


def _parse_u_range(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError("u-range must be a:b:n, got %r" % text)
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError("u-range must be a:b:n with numeric parts, got %r" % text)
    if n < 2:
        raise UsageError("u-range needs n >= 2, got %d" % n)
    return (a, b, n)


def _parse_sources(text: str) -> list[tuple[float, int, float]]:
    out = []
    for item in (p.strip() for p in text.split(",") if p.strip()):
        parts = item.split(":")
        if len(parts) != 3:
            raise UsageError("source entries are rate:direction:amplitude, "
                             "got %r" % item)
        out.append((float(parts[0]), int(parts[1]), float(parts[2])))
    return out


def _model_from_section(sec: dict) -> tuple[ModelSpec, str]:
    preset = sec.get("preset", "")
    if preset:
        if preset not in MODEL_PRESETS:
            raise UsageError("unknown preset %r (have: %s)"
                             % (preset, ", ".join(sorted(MODEL_PRESETS))))
        base = MODEL_PRESETS[preset]
        overrides = {k: v for k, v in sec.items() if k != "preset"}
        if not overrides:
            return base, preset
        sec = {"family": base.family, "dimension": str(base.dimension),
               "masses": ",".join(map(str, base.masses)),
               "densities": ",".join(map(str, base.densities)),
               "temperature": str(base.temperature), **overrides}
        preset = ""
    if "family" not in sec:
        raise UsageError("model needs a preset or a family")
    family = sec["family"].strip()
    if family not in FAMILIES:
        raise UsageError("unknown family %r (have: %s)"
                         % (family, ", ".join(FAMILIES)))
    kwargs = {"family": family}
    if "dimension" in sec:
        kwargs["dimension"] = int(sec["dimension"])
    if "masses" in sec:
        kwargs["masses"] = _floats(sec["masses"])
    if "densities" in sec:
        kwargs["densities"] = _floats(sec["densities"])
    if "temperature" in sec:
        kwargs["temperature"] = float(sec["temperature"])
    if "quantum_sign" in sec:
        kwargs["quantum_sign"] = int(sec["quantum_sign"])
    if "cutoff_lambda" in sec:
        kwargs["cutoff_lambda"] = float(sec["cutoff_lambda"])
    if "energy_levels" in sec:
        kwargs["energy_levels"] = _nested_floats(sec["energy_levels"])
    if "level_weights" in sec:
        kwargs["level_weights"] = _nested_floats(sec["level_weights"])
    if "internal_dof" in sec:
        kwargs["internal_dof"] = _floats(sec["internal_dof"])
    try:
        return ModelSpec(**kwargs), preset
    except ValueError as e:
        raise UsageError("bad model: %s" % e)


def _config_from_sections(sections: dict[str, dict[str, str]]) -> RunConfig:
    for name, keys in sections.items():
        if name not in _SECTIONS:
            raise UsageError("unknown config section [%s]" % name)
        for k in keys:
            if k not in _SECTIONS[name]:
                raise UsageError("unknown key %r in section [%s]" % (k, name))
    if "model" not in sections:
        raise UsageError("config needs a [model] section")
    model, preset = _model_from_section(sections["model"])
    cfg = RunConfig(model=model, preset=preset)
    g = sections.get("grid", {})
    if "nodes" in g:
        cfg.nodes = int(g["nodes"])
    if "energy_nodes" in g:
        cfg.energy_nodes = int(g["energy_nodes"])
    if "angular_nodes" in g:
        cfg.angular_nodes = int(g["angular_nodes"])
    if "extent" in g:
        cfg.extent = float(g["extent"])
    b = sections.get("boundary", {})
    if "type" in b:
        if b["type"] not in ("absorb", "accommodate"):
            raise UsageError("boundary type must be absorb or accommodate, "
                             "got %r" % b["type"])
        cfg.boundary_type = b["type"]
    if "coefficient" in b:
        cfg.coefficient = float(b["coefficient"])
    p = sections.get("penalty", {})
    if "eps1" in p:
        cfg.eps1 = float(p["eps1"])
    if "eps2" in p:
        cfg.eps2 = float(p["eps2"])
    r = sections.get("run", {})
    if "u" in r:
        cfg.u = float(r["u"])
    if "u_range" in r:
        cfg.u_range = _parse_u_range(r["u_range"])
    if "samples" in r:
        cfg.samples = int(r["samples"])
    if "extra_conditions" in r:
        cfg.extra_conditions = _bool(r["extra_conditions"])
    wall_keys = [k for k in ("wall_densities", "wall_velocity",
                             "wall_temperature") if k in r]
    if wall_keys:
        dens = _floats(r.get("wall_densities", "1.0"))
        vel = _floats(r.get("wall_velocity", "0.0"))
        d = cfg.model.dimension
        if len(vel) == 1:
            vel = vel + (0.0,) * (d - 1)
        temp = float(r.get("wall_temperature", cfg.model.temperature))
        try:
            cfg.wall = WallState(densities=dens, velocity=vel, temperature=temp)
        except ValueError as e:
            raise UsageError("bad wall state: %s" % e)
    if "sources" in r:
        cfg.sources = _parse_sources(r["sources"])
    o = sections.get("output", {})
    if "dir" in o:
        cfg.out_dir = o["dir"]
    if "format" in o:
        if o["format"] not in ("csv", "json"):
            raise UsageError("format must be csv or json, got %r" % o["format"])
        cfg.out_format = o["format"]
    return cfg


def load_config(path: str) -> RunConfig:
    """Parse an INI or JSON config file into a RunConfig."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise UsageError("cannot read config %s: %s" % (path, e))
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise UsageError("bad JSON config: %s" % e)
        def _as_text(v):
            if isinstance(v, list):
                if v and isinstance(v[0], list):
                    return "; ".join(",".join(map(str, g)) for g in v)
                return ",".join(map(str, v))
            return str(v)
        sections = {}
        for name, sec in data.items():
            if not isinstance(sec, dict):
                raise UsageError("section %r must be an object" % name)
            sections[name] = {k: _as_text(v) for k, v in sec.items()}
        return _config_from_sections(sections)
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise UsageError("bad config: %s" % e)
    return _config_from_sections({s: dict(cp.items(s)) for s in cp.sections()})


def config_text(cfg: RunConfig) -> str:
    """Serialize back to INI; parsing this text reproduces normalized()."""
    n = cfg.normalized()
    lines = []
    if cfg.preset:
        lines += ["[model]", "preset = %s" % cfg.preset]
    else:
        lines.append("[model]")
        for k, v in n["model"].items():
            if isinstance(v, list) and v and isinstance(v[0], list):
                lines.append("%s = %s" % (k, "; ".join(
                    ",".join("%.12g" % x for x in grp) for grp in v)))
            elif isinstance(v, list):
                lines.append("%s = %s" % (k, ",".join("%.12g" % x for x in v)))
            else:
                lines.append("%s = %s" % (k, v))
    lines.append("")
    lines.append("[grid]")
    for k, v in n["grid"].items():
        if v is not None:
            lines.append("%s = %s" % (k, v))
    lines += ["", "[boundary]", "type = %s" % cfg.boundary_type,
              "coefficient = %.12g" % cfg.coefficient,
              "", "[penalty]", "eps1 = %.12g" % cfg.eps1,
              "eps2 = %.12g" % cfg.eps2, "", "[run]"]
    if cfg.u is not None:
        lines.append("u = %.12g" % cfg.u)
    if cfg.u_range is not None:
        lines.append("u_range = %.12g:%.12g:%d" % cfg.u_range)
    lines.append("samples = %d" % cfg.samples)
    lines.append("extra_conditions = %s" % str(cfg.extra_conditions).lower())
    if cfg.wall is not None:
        lines.append("wall_densities = %s"
                     % ",".join("%.12g" % x for x in cfg.wall.densities))
        lines.append("wall_velocity = %s"
                     % ",".join("%.12g" % x for x in cfg.wall.velocity))
        lines.append("wall_temperature = %.12g" % cfg.wall.temperature)
    if cfg.sources:
        lines.append("sources = %s" % ", ".join(
            "%.12g:%d:%.12g" % s for s in cfg.sources))
    lines += ["", "[output]", "dir = %s" % cfg.out_dir,
              "format = %s" % cfg.out_format, ""]
    return "\n".join(lines)


def _write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        json.dump(_r12(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join("%d" % v if isinstance(v, (int, np.integer))
                              else "%.12g" % v for v in row) + "\n")


def _build(cfg: RunConfig, u_grid: float):
    space = default_grid(cfg.model, u=u_grid, nodes=cfg.nodes,
                         energy_nodes=cfg.energy_nodes,
                         angular_nodes=cfg.angular_nodes, extent=cfg.extent)
    eq = equilibrium(cfg.model, space)
    return space, eq


def _cmd_speeds(cfg: RunConfig, out: str) -> dict:
    sp = closed_form_speeds(cfg.model)
    obj = {"u0": sp["u0"], "u_plus": sp["u_plus"], "u_minus": sp["u_minus"]}
    _write_json(os.path.join(out, "speeds.json"), obj)
    return obj


def _cmd_signature(cfg: RunConfig, out: str) -> dict:
    u = cfg.u if cfg.u is not None else 0.0
    space, eq = _build(cfg, 0.0)
    op = build_bgk_operator(cfg.model, space, eq, u=u)
    sig = signature(op)
    obj = {"u": u, "k_plus": sig.n_pos, "k_minus": sig.n_neg,
           "l": sig.n_zero, "margin": sig.margin}
    if cfg.out_format == "csv":
        _write_csv(os.path.join(out, "signature.csv"),
                   ["u", "k_plus", "k_minus", "l"],
                   [(u, sig.n_pos, sig.n_neg, sig.n_zero)])
    else:
        _write_json(os.path.join(out, "signature.json"), obj)
    return obj


def _cmd_basis(cfg: RunConfig, out: str) -> dict:
    u = cfg.u if cfg.u is not None else 0.0
    space, eq = _build(cfg, 0.0)
    op = build_bgk_operator(cfg.model, space, eq, u=u)
    basis = kernel_basis(op)
    sig = basis.signature
    obj = {"u": u, "k_plus": sig.n_pos, "k_minus": sig.n_neg, "l": sig.n_zero,
           "beta": list(basis.beta), "alpha": list(basis.alpha),
           "gamma": list(basis.gamma), "beta_hat_max": basis.beta_hat_max,
           "lift_residual": basis.lift_residual}
    _write_json(os.path.join(out, "basis.json"), obj)
    return obj


def _cmd_coercivity(cfg: RunConfig, out: str) -> tuple[dict, int]:
    u = cfg.u if cfg.u is not None else 0.0
    space, eq = _build(cfg, 0.0)
    op = build_bgk_operator(cfg.model, space, eq, u=u)
    basis = kernel_basis(op)
    config = penalty_constants(op, basis, eps1=cfg.eps1, eps2=cfg.eps2)
    rep = coercivity_check(build_penalized_operator(op, basis, config))
    obj = {"u": u, "sigma": rep.sigma, "alpha": rep.alpha, "beta": rep.beta,
           "mu": rep.mu, "min_eigenvalue": rep.min_eigenvalue,
           "passed": rep.passed}
    _write_json(os.path.join(out, "coercivity.json"), obj)
    if not rep.passed:
        print("coercivity failed: min symmetric eigenvalue %.12g < mu %.12g"
              % (rep.min_eigenvalue, rep.mu), file=sys.stderr)
        return obj, 2
    return obj, 0


def _cmd_validate(cfg: RunConfig, out: str) -> tuple[dict, int]:
    u = cfg.u if cfg.u is not None else 0.0
    failures = []
    space, eq = _build(cfg, 0.0)
    try:
        split_half_spaces(space, u)
    except ValueError as e:
        failures.append(str(e))
    op = build_bgk_operator(cfg.model, space, eq, u=u)
    rep = validate_assumptions(op)
    obj = {"u": u, "assumptions": rep.as_dict()}
    if not rep.passed:
        failures.append("operator hypotheses failed: symmetry residual %.12g, "
                        "min eigenvalue %.12g, kernel residual %.12g, "
                        "min |b| %.12g, gamma %.12g"
                        % (rep.symmetry_residual, rep.min_eigenvalue,
                           rep.kernel_residual, rep.b_min_abs, rep.gamma))
    if not failures:
        basis = kernel_basis(op)
        config = penalty_constants(op, basis, eps1=cfg.eps1, eps2=cfg.eps2)
        crep = coercivity_check(build_penalized_operator(op, basis, config))
        obj["coercivity"] = {"sigma": crep.sigma, "mu": crep.mu,
                             "min_eigenvalue": crep.min_eigenvalue,
                             "passed": crep.passed}
        if not crep.passed:
            failures.append("coercivity failed: min symmetric eigenvalue "
                            "%.12g < mu %.12g" % (crep.min_eigenvalue, crep.mu))
    obj["passed"] = not failures
    obj["failures"] = failures
    _write_json(os.path.join(out, "validate.json"), obj)
    for msg in failures:
        print(msg, file=sys.stderr)
    return obj, 2 if failures else 0


def _cmd_solve(cfg: RunConfig, out: str) -> dict:
    u = cfg.u if cfg.u is not None else 0.0
    accom = cfg.coefficient if cfg.boundary_type == "accommodate" else 0.0
    space, eq = _build(cfg, u if accom else 0.0)
    op = build_bgk_operator(cfg.model, space, eq, u=u)
    wall = cfg.wall if cfg.wall is not None else WallState(
        densities=(1.0,) * cfg.model.n_species,
        velocity=(0.0,) * cfg.model.dimension,
        temperature=1.05 * cfg.model.temperature)
    source = None
    if cfg.sources:
        dirs = wall_parameter_directions(cfg.model, eq, wall, u)
        rates, profiles = [], []
        for (rate, idx, amp) in cfg.sources:
            if not 0 <= idx < dirs.shape[1]:
                raise UsageError("source direction %d out of range [0, %d)"
                                 % (idx, dirs.shape[1]))
            rates.append(rate)
            profiles.append(amp * op.apply(dirs[:, idx]))
        source = SourceTerm(np.array(rates), np.column_stack(profiles))
    sol = solve_halfspace(model=cfg.model, u=u, accommodation=accom,
                          wall=wall, source=source, space=space, op=op)
    xs = sol.x_grid(64)
    prof = sol.evaluate(xs)
    w = space.weights
    norms = np.sqrt((w[:, None] * prof ** 2).sum(axis=0))
    moments = sol.kernel_moments(xs)
    header = ["x", "norm"] + ["m%d" % i for i in range(moments.shape[0])]
    rows = [tuple([xs[j], norms[j]] + list(moments[:, j]))
            for j in range(xs.size)]
    _write_csv(os.path.join(out, "profile.csv"), header, rows)
    try:
        est = measure_decay(sol)
        decay = est.as_dict()
    except ValueError:
        decay = None
    obj = {"u": u, "accommodation": accom,
           "decay": decay,
           "sigma": sol.sigma,
           "residuals": {"boundary": sol.boundary_residual(),
                         "equation": sol.equation_residual(),
                         "removal": float(np.max(np.abs(sol.removal_residuals())))
                         if sol.conditions_consumed else 0.0},
           "conditions_consumed": sol.conditions_consumed,
           "free_parameters": sol.free_parameters,
           "condition_rank": sol.condition_rank}
    _write_json(os.path.join(out, "summary.json"), obj)
    return obj


def _cmd_sweep(cfg: RunConfig, out: str) -> dict:
    if cfg.u_range is not None:
        a, b, n = cfg.u_range
        tab = sweep_signature(cfg.model, (a, b), samples=n, nodes=cfg.nodes)
        _write_csv(os.path.join(out, "sweep.csv"),
                   ["u", "k_plus", "k_minus", "l"], tab.rows)
        obj = tab.as_dict()
        if cfg.out_format == "json":
            _write_json(os.path.join(out, "sweep.json"), obj)
        return obj
    if cfg.u is None:
        raise UsageError("sweep needs --u-range a:b:n for a signature table "
                         "or --u <degenerate value> for a decay study")
    rep = uniform_decay_study(cfg.model, cfg.u, nodes=cfg.nodes,
                              extra_conditions=cfg.extra_conditions,
                              wall=cfg.wall)
    _write_json(os.path.join(out, "regime_report.json"), rep.as_dict())
    _write_csv(os.path.join(out, "regime_report.csv"),
               ["u", "k_plus", "k_minus", "l", "sigma_u_flag_on",
                "sigma_u_flag_off"], rep.csv_rows())
    return rep.as_dict()


def run(command: str, cfg: RunConfig) -> int:
    """Execute one command; returns the exit code."""
    if command not in COMMANDS:
        raise UsageError("unknown command %r (have: %s)"
                         % (command, ", ".join(COMMANDS)))
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    try:
        if command == "speeds":
            obj = _cmd_speeds(cfg, out)
        elif command == "signature":
            obj = _cmd_signature(cfg, out)
        elif command == "basis":
            obj = _cmd_basis(cfg, out)
        elif command == "coercivity":
            obj, code = _cmd_coercivity(cfg, out)
            print(json.dumps(_r12(obj), sort_keys=True, indent=2))
            return code
        elif command == "validate":
            obj, code = _cmd_validate(cfg, out)
            print(json.dumps(_r12(obj), sort_keys=True, indent=2))
            return code
        elif command == "solve":
            obj = _cmd_solve(cfg, out)
        else:
            obj = _cmd_sweep(cfg, out)
    except UsageError:
        raise
    except ValueError as e:
        # numeric validation raised by the library (sonic nodes, coercivity,
        # rank deficiencies, resonances); messages carry the measured values
        print("validation failure: %s" % e, file=sys.stderr)
        return 2
    print(json.dumps(_r12(obj), sort_keys=True, indent=2))
    return 0


def _parse_argv(argv: list[str]) -> tuple[str, RunConfig]:
    if not argv:
        raise UsageError("usage: kinhalf <command> [--config <path>] "
                         "[--model <name>] [--u <val>] [--u-range a:b:n] "
                         "[--extra-conditions] [--out <dir>] "
                         "[--format csv|json]; commands: %s"
                         % ", ".join(COMMANDS))
    command, rest = argv[0], argv[1:]
    opts: dict[str, str] = {}
    flags = {"--config": "config", "--model": "model", "--u": "u",
             "--u-range": "u_range", "--out": "out", "--format": "format",
             "--nodes": "nodes"}
    i = 0
    while i < len(rest):
        arg = rest[i]
        if arg == "--extra-conditions":
            opts["extra_conditions"] = "true"
            i += 1
            continue
        if arg not in flags:
            raise UsageError("unknown flag %r" % arg)
        if i + 1 >= len(rest):
            raise UsageError("flag %s needs a value" % arg)
        opts[flags[arg]] = rest[i + 1]
        i += 2
    if "config" in opts:
        cfg = load_config(opts["config"])
    elif "model" in opts:
        cfg = _config_from_sections({"model": {"preset": opts["model"]}})
    else:
        raise UsageError("need --config <path> or --model <name>")
    if "model" in opts and "config" in opts:
        model, preset = _model_from_section({"preset": opts["model"]})
        cfg.model, cfg.preset = model, preset
    if "u" in opts:
        try:
            cfg.u = float(opts["u"])
        except ValueError:
            raise UsageError("--u needs a number, got %r" % opts["u"])
    if "u_range" in opts:
        cfg.u_range = _parse_u_range(opts["u_range"])
    if "extra_conditions" in opts:
        cfg.extra_conditions = True
    if "out" in opts:
        cfg.out_dir = opts["out"]
    if "format" in opts:
        if opts["format"] not in ("csv", "json"):
            raise UsageError("format must be csv or json, got %r"
                             % opts["format"])
        cfg.out_format = opts["format"]
    if "nodes" in opts:
        try:
            cfg.nodes = int(opts["nodes"])
        except ValueError:
            raise UsageError("--nodes needs an integer, got %r" % opts["nodes"])
    return command, cfg


def main(argv: list[str] | None = None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        command, cfg = _parse_argv(args)
        return run(command, cfg)
    except UsageError as e:
        print("usage error: %s" % e, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
