"""Command-line front end: simulations, sweeps, closed forms and rates as CSV.

Configuration is a flat ``key = value`` text file (``#`` starts a comment);
command-line flags override file values. Every CSV starts with comment
lines holding the fully resolved configuration, so a file can be rerun.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 validity flag raised under ``--strict``.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import io
import math
import sys
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

from . import analytic, memories
from .bogoliubov import BogoliubovError, ReducedMemory
from .fockstate import FockStateError, TruncationLeakError, bell_state
from .genfun import GenFunError, SeriesBudgetError
from .repeater import (
    DarkCountPath,
    DetectorClass,
    RepeaterParams,
    ZeroProbabilityError,
    bell,
    rate,
    rate_monte_carlo,
    run_chain,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_STRICT = 4

NUMERIC_ERRORS = (TruncationLeakError, ZeroProbabilityError, GenFunError, SeriesBudgetError, FloatingPointError)
LOG2_3 = math.log2(3.0)


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending line or flag."""


# ---------------------------------------------------------------------------
# Configuration schema
# ---------------------------------------------------------------------------


def _probability(v: float) -> None:
    if not 0 <= v <= 1:
        raise ValueError("must lie in [0, 1]")


def _non_negative(v: float) -> None:
    if not v >= 0:
        raise ValueError("must be non-negative")


def _positive(v: float) -> None:
    if not v > 0:
        raise ValueError("must be positive")


def _at_least_one(v: int) -> None:
    if v < 1:
        raise ValueError("must be at least 1")


def _deficit(v: float) -> None:
    if not 0 <= v < 1:
        raise ValueError("must lie in [0, 1)")


@dataclass(frozen=True)
class KeySpec:
    kind: type
    default: object
    help: str
    check: Callable | None = None
    choices: tuple[str, ...] = ()


MEMORY_FIELDS = ("b1", "b2", "c1", "c2", "c3", "kappa", "xi", "g", "s")

KEYS: dict[str, KeySpec] = {
    "r": KeySpec(float, 0.0, "down-converter squeezing parameter", _non_negative),
    "p_gen": KeySpec(float, 0.0, "generation loss probability", _probability),
    "p_con": KeySpec(float, 0.0, "connection loss probability", _probability),
    "n_dc_gen": KeySpec(float, 0.0, "dark counts per generation detector", _non_negative),
    "n_dc_con": KeySpec(float, 0.0, "dark counts per connection detector", _non_negative),
    "detector": KeySpec(str, "non_counting", "detector class", choices=("counting", "non_counting")),
    "ps_detector": KeySpec(str, "counting", "postselection detector class", choices=("counting", "non_counting")),
    "ps_loss": KeySpec(float, 0.0, "loss before the postselection detectors", _probability),
    "dark_count_path": KeySpec(str, "memory", "where connection dark counts enter", choices=("memory", "detector")),
    "n": KeySpec(int, 3, "highest nesting level", _non_negative),
    "tau": KeySpec(float, 1.0, "elementary communication time", _positive),
    "cutoff": KeySpec(int, 2, "photons kept per light mode", _at_least_one),
    "start": KeySpec(str, "generate", "elementary pair: generated or an ideal Bell pair", choices=("generate", "bell")),
    "seed": KeySpec(int, 0, "Monte Carlo seed", _non_negative),
    "trials": KeySpec(int, 100000, "Monte Carlo trials", _non_negative),
    "fixed_deficit": KeySpec(float, 0.0, "rate mode: solve r per length for this relative S deficit", _deficit),
    "workers": KeySpec(int, 1, "sweep worker processes", _at_least_one),
    "sweep.param": KeySpec(str, "", "config key varied by sweep"),
    "sweep.values": KeySpec(str, "", "comma-separated sweep values"),
    "memory.kind": KeySpec(str, "ideal", "memory model", choices=memories.MEMORY_KINDS),
    **{f"memory.{f}": KeySpec(str, "", f"memory field {f}") for f in MEMORY_FIELDS},
}

# keys that do not change the physics of a sweep point
NON_SWEEPABLE = {"sweep.param", "sweep.values", "seed", "workers", "trials"}


def _convert(key: str, raw: str) -> object:
    spec = KEYS[key]
    raw = raw.strip()
    if spec.kind is int:
        try:
            value: object = int(raw)
        except ValueError:
            raise ValueError(f"expected an integer, got {raw!r}") from None
    elif spec.kind is float:
        try:
            value = float(raw)
        except ValueError:
            raise ValueError(f"expected a number, got {raw!r}") from None
        if not math.isfinite(value):
            raise ValueError("must be finite")
    else:
        value = raw
        if spec.choices and value not in spec.choices:
            raise ValueError(f"expected one of {', '.join(spec.choices)}, got {raw!r}")
    if spec.check is not None:
        spec.check(value)
    return value


def parse_config_text(text: str, source: str = "<config>") -> dict[str, object]:
    """Parse flat ``key = value`` text; errors carry ``source:line``."""
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        where = f"{source}:{lineno}"
        if "=" not in body:
            raise ConfigError(f"{where}: expected 'key = value', got {body!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        try:
            values[key] = _convert(key, raw)
        except ValueError as exc:
            raise ConfigError(f"{where}: {key}: {exc}") from None
    return values


def resolve_config(file_values: dict[str, object], overrides: dict[str, str]) -> dict[str, object]:
    """Defaults, then file values, then flag overrides (validated)."""
    cfg = {k: spec.default for k, spec in KEYS.items()}
    cfg.update(file_values)
    for key, raw in overrides.items():
        if key not in KEYS:
            raise ConfigError(f"--set: unknown key {key!r}")
        try:
            cfg[key] = _convert(key, raw)
        except ValueError as exc:
            raise ConfigError(f"--{flag_name(key)}: {exc}") from None
    memory_for(cfg)
    if cfg["sweep.param"]:
        sweep_points(cfg)
    return cfg


def flag_name(key: str) -> str:
    return key.replace(".", "-").replace("_", "-")


def memory_for(cfg: dict[str, object]) -> ReducedMemory:
    fields = {k: v for k, v in cfg.items() if k.startswith("memory.") and v != ""}
    try:
        return memories.from_config(fields)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"memory: {exc}") from None


def params_for(cfg: dict[str, object], n: int | None = None) -> RepeaterParams:
    try:
        return RepeaterParams(
            r=cfg["r"],
            p_gen=cfg["p_gen"],
            p_con=cfg["p_con"],
            n_dc_gen=cfg["n_dc_gen"],
            n_dc_con=cfg["n_dc_con"],
            detector=DetectorClass(cfg["detector"]),
            n=cfg["n"] if n is None else n,
            memory=memory_for(cfg),
            tau=cfg["tau"],
            cutoff=cfg["cutoff"],
            ps_detector=DetectorClass(cfg["ps_detector"]),
            ps_loss=cfg["ps_loss"],
            dark_count_path=DarkCountPath(cfg["dark_count_path"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def sweep_points(cfg: dict[str, object]) -> list[object]:
    key = str(cfg["sweep.param"])
    if key not in KEYS or key in NON_SWEEPABLE:
        raise ConfigError(f"sweep.param: {key!r} is not a sweepable key")
    raw = [v for v in str(cfg["sweep.values"]).split(",") if v.strip()]
    if not raw:
        raise ConfigError("sweep.values: no values given")
    try:
        return [_convert(key, v) for v in raw]
    except ValueError as exc:
        raise ConfigError(f"sweep.values: {key}: {exc}") from None


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def fmt(value: object) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.16e}"
    if isinstance(value, (list, tuple)):
        return ";".join(fmt(v) for v in value)
    return str(value)


def header_lines(command: str, cfg: dict[str, object]) -> list[str]:
    lines = [f"# dlczsim {command}"]
    lines += [f"# {k} = {fmt(cfg[k]) if not isinstance(cfg[k], str) else cfg[k]}" for k in sorted(cfg)]
    return lines


def render_csv(command: str, cfg: dict[str, object], columns: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    out = io.StringIO()
    for line in header_lines(command, cfg):
        out.write(line + "\n")
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(fmt(v) for v in row) + "\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


@dataclass
class Output:
    text: str
    strict_failure: str = ""
    path: str | None = None


def _chain(cfg: dict[str, object], n: int | None = None):
    params = params_for(cfg, n)
    rho0 = bell_state(params.cutoff) if cfg["start"] == "bell" else None
    return params, run_chain(params, rho0)


SIMULATE_COLUMNS = ("n", "L_over_L0", "S", "q_ps", "q_list", "rate_tau")


def simulate_rows(cfg: dict[str, object]) -> tuple[list[list[object]], object]:
    params, chain = _chain(cfg)
    rows = []
    for level, state in enumerate(chain.states):
        b = bell(state, params)
        qs = chain.q[: level + 1]
        rows.append([level, 2**level, b.S, b.q_ps, list(qs), rate(qs, b.q_ps, 1.0).exact])
    return rows, chain.rho


def cmd_simulate(cfg: dict[str, object], dump_state: str | None = None) -> Output:
    """Rows ``(n, L/L0, S, q_ps, q_0..q_n, R tau)`` for every level up to ``n``."""
    rows, final = simulate_rows(cfg)
    if dump_state:
        lines = header_lines("simulate --dump-state", cfg)
        lines += [",".join(row) for row in final.to_csv_rows()]
        with open(dump_state, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    return Output(render_csv("simulate", cfg, SIMULATE_COLUMNS, rows))


def _sweep_point(args: tuple[dict, str, object]) -> list[list[object]]:
    cfg, key, value = args
    point = dict(cfg)
    point[key] = value
    rows, _ = simulate_rows(point)
    return [[value, *row] for row in rows]


def cmd_sweep(cfg: dict[str, object]) -> Output:
    """Simulate every value of ``sweep.param``; rows sorted by value then level."""
    if not cfg["sweep.param"]:
        raise ConfigError("sweep needs sweep.param and sweep.values")
    key = str(cfg["sweep.param"])
    values = sweep_points(cfg)
    jobs = [(cfg, key, v) for v in values]
    workers = int(cfg["workers"])
    if workers > 1 and len(jobs) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]
    rows = sorted((row for block in results for row in block), key=lambda row: (str(row[0]) if isinstance(row[0], str) else row[0], row[1]))
    return Output(render_csv("sweep", cfg, (key, *SIMULATE_COLUMNS), rows))


def _analytic_inputs(cfg: dict[str, object], L: float) -> tuple[analytic.PerturbativeInputs, float, float]:
    mem = memory_for(cfg)
    generated = cfg["start"] == "generate"
    x = analytic.PerturbativeInputs(
        L=L,
        p_gen=cfg["p_gen"],
        p_con=cfg["p_con"],
        c1=mem.c1,
        c2=mem.c2,
        c3=mem.c3,
        r=cfg["r"] if generated else 0.0,
        detector=analytic.Detector(cfg["detector"]),
    )
    return x, cfg["n_dc_con"], cfg["n_dc_gen"] if generated else 0.0


COMPARE_COLUMNS = (
    "n",
    "L_over_L0",
    "S_numeric",
    "S_analytic",
    "deficit_numeric",
    "deficit_analytic",
    "abs_error",
    "rel_error",
    "analytic_valid",
    "cross_terms",
    "n_dc_over_r2",
)


def cmd_compare(cfg: dict[str, object]) -> Output:
    """Numeric Bell parameter against the summed closed-form deficits, per level."""
    params, chain = _chain(cfg)
    rows = []
    flagged = []
    for level, state in enumerate(chain.states):
        L = 2**level
        x, n_dc_con, n_dc_gen = _analytic_inputs(cfg, L)
        deficit = analytic.summed_deficit(x, n_dc_con, n_dc_gen)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            analytic.s_memory_darkcount(replace(x, n_dc=n_dc_con))
            analytic.s_finite_squeezing(x)
            analytic.s_generation_darkcount(replace(x, n_dc=n_dc_gen))
        valid = deficit < 1 and not caught
        if x.r > 0:
            dom = analytic.cross_term_dominance(n_dc_gen, x.r)
            flag, ratio = dom.flag, dom.ratio
        else:
            flag, ratio = "none", 0.0
        S = bell(state, params).S
        num = 1.0 - S / analytic.SQRT8
        S_an = analytic.SQRT8 * (1.0 - deficit)
        rel = (num - deficit) / num if num != 0 else (0.0 if deficit == 0 else math.inf)
        rows.append([level, L, S, S_an, num, deficit, abs(num - deficit), rel, valid, flag, ratio])
        if not valid or flag == "dominant":
            flagged.append(level)
    failure = f"closed forms not trustworthy at levels {flagged}" if flagged else ""
    return Output(render_csv("compare", cfg, COMPARE_COLUMNS, rows), failure)


RATE_COLUMNS = (
    "n",
    "L_over_L0",
    "r",
    "rate_tau_exact",
    "rate_tau_simplified",
    "rate_tau_closed_form",
    "rate_tau_monte_carlo",
    "rate_tau_monte_carlo_stderr",
    "reference_slope",
)


def _r_for_level(cfg: dict[str, object], L: int) -> float:
    if cfg["fixed_deficit"] > 0:
        return analytic.squeezing_for_deficit(
            cfg["fixed_deficit"], L, cfg["p_gen"], cfg["p_con"], analytic.Detector(cfg["detector"])
        )
    return cfg["r"]


def _level_rate(cfg: dict[str, object], level: int, monte_carlo: bool) -> list[object]:
    L = 2**level
    r = _r_for_level(cfg, L)
    point = dict(cfg, r=r)
    params, chain = _chain(point, level)
    q_ps = bell(chain.rho, params).q_ps
    exact = rate(chain.q, q_ps, 1.0)
    closed = math.nan
    if cfg["p_con"] < 1:
        closed = analytic.rate_closed_form(r, cfg["p_gen"], cfg["p_con"], L, analytic.Detector(cfg["detector"]))
    mc_rate = mc_err = math.nan
    if monte_carlo and cfg["trials"] > 0:
        mc = rate_monte_carlo(chain.q, q_ps, cfg["trials"], 1.0, seed=cfg["seed"] + level)
        mc_rate = 1.0 / mc.mean_time
        mc_err = mc.stderr / mc.mean_time**2
    reference = L ** (-2.0 - LOG2_3) if cfg["fixed_deficit"] > 0 else math.nan
    return [level, L, r, exact.exact, exact.simplified, closed, mc_rate, mc_err, reference]


def cmd_rate(cfg: dict[str, object]) -> Output:
    """Pair rate per level: exact and simplified waiting-time formulas, closed form, Monte Carlo."""
    rows = [_level_rate(cfg, level, True) for level in range(cfg["n"] + 1)]
    return Output(render_csv("rate", cfg, RATE_COLUMNS, rows))


RATE_MC_COLUMNS = ("n", "L_over_L0", "mean_time_over_tau", "stderr", "rate_tau_monte_carlo", "rate_tau_exact", "trials")


def cmd_rate_mc(cfg: dict[str, object]) -> Output:
    """Monte Carlo waiting time for the simulated success probabilities at every level."""
    if cfg["trials"] < 1:
        raise ConfigError("trials: rate-mc needs at least one trial")
    params, chain = _chain(cfg)
    rows = []
    for level, state in enumerate(chain.states):
        qs = chain.q[: level + 1]
        q_ps = bell(state, params).q_ps
        mc = rate_monte_carlo(qs, q_ps, cfg["trials"], 1.0, seed=cfg["seed"] + level)
        rows.append([level, 2**level, mc.mean_time, mc.stderr, 1.0 / mc.mean_time, rate(qs, q_ps, 1.0).exact, mc.trials])
    return Output(render_csv("rate-mc", cfg, RATE_MC_COLUMNS, rows))


# ---------------------------------------------------------------------------
# Closed forms by name
# ---------------------------------------------------------------------------


def _perturbative(fn, a) -> tuple[list[tuple[str, object]], bool]:
    x = analytic.PerturbativeInputs(
        L=a.L, p_gen=a.p_gen, p_con=a.p_con, c1=a.c1, c2=complex(a.c2), c3=a.c3, n_dc=a.n_dc, r=a.r, detector=a.detector
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", analytic.PerturbativeWarning)
        res = fn(x)
    return [("S", res.S), ("deficit", res.deficit), ("valid", res.valid)], res.valid


def _threshold(res: analytic.ThresholdResult, name: str = "L_over_L0") -> tuple[list[tuple[str, object]], bool]:
    return [(name, res.value), ("degenerate", res.degenerate)], not res.degenerate


def _one_pass(a):
    s = analytic.one_pass_s_threshold(a.L, a.p_con)
    return [("s", s), ("s_decibel", analytic.to_decibel(s))], True


def _dominance(a):
    d = analytic.cross_term_dominance(a.n_dc, a.r)
    return [("cross_terms", d.flag), ("n_dc_over_r2", d.ratio)], d.flag == "negligible"


FORMULAS: dict[str, tuple[str, Callable]] = {
    "memory-darkcount": ("S with memory noise and connection dark counts", lambda a: _perturbative(analytic.s_memory_darkcount, a)),
    "finite-squeezing": ("S with multi-pair emission", lambda a: _perturbative(analytic.s_finite_squeezing, a)),
    "generation-darkcount": ("S with generation dark counts", lambda a: _perturbative(analytic.s_generation_darkcount, a)),
    "ideal-memory-c1": ("S of the c1-only chain to second order", lambda a: ([("S", analytic.s_ideal_memory_c1(a.L, a.c1))], True)),
    "max-distance-squeezing": (
        "largest L/L0 with S >= 2 for squeezing",
        lambda a: _threshold(analytic.max_distance_squeezing(a.r, a.p_gen, a.p_con, a.detector)),
    ),
    "max-distance-gen-darkcount": (
        "largest L/L0 with S >= 2 for generation dark counts",
        lambda a: _threshold(analytic.max_distance_gen_darkcount(a.n_dc, a.p_gen, a.detector)),
    ),
    "max-distance-two-pass": ("largest L/L0 for the two-pass memory", lambda a: _threshold(analytic.max_distance_two_pass(a.xi, a.p_con))),
    "one-pass-squeezing-threshold": ("atomic squeezing s reaching S = 2 at L", _one_pass),
    "cross-term-dominance": ("n_dc / r^2 regime flag", _dominance),
    "rate-closed-form": (
        "loss-only rate times tau",
        lambda a: ([("rate_tau", analytic.rate_closed_form(a.r, a.p_gen, a.p_con, a.L, a.detector))], True),
    ),
    "eta": ("single-excitation weight after n lossy connections", lambda a: ([("eta", analytic.eta_solution(a.n, a.p_con, a.detector))], True)),
    "eta-product-estimate": (
        "dilogarithm estimate of the eta product",
        lambda a: ([("estimate", analytic.eta_product_estimate(a.n, a.p_con)), ("product", analytic.eta_product(a.n, a.p_con))], True),
    ),
    "dilog": ("real dilogarithm", lambda a: ([("Li2", analytic.dilog(a.x))], True)),
}


def cmd_analytic(a: argparse.Namespace) -> Output:
    _, fn = FORMULAS[a.formula]
    try:
        values, ok = fn(a)
    except ValueError as exc:
        raise ConfigError(f"{a.formula}: {exc}") from None
    inputs = {k: getattr(a, k) for k in ("L", "n", "r", "p_gen", "p_con", "c1", "c2", "c3", "n_dc", "xi", "x", "detector")}
    inputs["formula"] = a.formula
    text = render_csv("analytic", inputs, ("quantity", "value"), values)
    return Output(text, "" if ok else f"{a.formula}: validity flag raised")


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

RUN_COMMANDS = {
    "simulate": "chain simulation with the Bell parameter and rate per level",
    "sweep": "simulate over the values of one parameter",
    "compare": "numeric against closed-form Bell parameter",
    "rate": "pair rates per level (exact, simplified, closed form, Monte Carlo)",
    "rate-mc": "Monte Carlo waiting times per level",
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("-o", "--output", help="write CSV here instead of stdout")
    p.add_argument("--strict", action="store_true", help="exit 4 when a validity flag is raised")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dlczsim", description="Simulate DLCZ-type repeater chains with Gaussian memories.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in RUN_COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", nargs="?", help="flat key = value configuration file")
        _add_common(p)
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any config key")
        if name == "simulate":
            p.add_argument("--dump-state", metavar="PATH", help="write the final density matrix as CSV")
        for key, spec in KEYS.items():
            p.add_argument(f"--{flag_name(key)}", dest=f"cfg:{key}", metavar=spec.kind.__name__.upper(), help=spec.help)

    p = sub.add_parser("analytic", help="evaluate a closed-form formula by name")
    p.add_argument("formula", choices=sorted(FORMULAS), help="; ".join(f"{k}: {v[0]}" for k, v in sorted(FORMULAS.items())))
    _add_common(p)
    p.add_argument("--L", type=float, default=1.0, help="chain length in elementary segments")
    p.add_argument("--n", type=int, default=0, help="nesting level")
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--p-gen", type=float, default=0.0)
    p.add_argument("--p-con", type=float, default=0.0)
    p.add_argument("--c1", type=float, default=0.0)
    p.add_argument("--c2", type=complex, default=0.0)
    p.add_argument("--c3", type=float, default=0.0)
    p.add_argument("--n-dc", type=float, default=0.0)
    p.add_argument("--xi", type=float, default=0.0)
    p.add_argument("--x", type=float, default=0.0, help="dilogarithm argument")
    p.add_argument("--detector", choices=("counting", "non_counting"), default="non_counting")
    return parser


def _overrides(ns: argparse.Namespace) -> dict[str, str]:
    out = {}
    for item in ns.set:
        if "=" not in item:
            raise ConfigError(f"--set: expected KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    for dest, value in vars(ns).items():
        if dest.startswith("cfg:") and value is not None:
            out[dest[4:]] = value
    return out


def run(argv: Sequence[str] | None = None) -> tuple[int, Output | None, str]:
    """Execute a command; returns ``(exit code, output, error message)``."""
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return (EXIT_OK if exc.code == 0 else EXIT_CONFIG), None, ""
    try:
        if ns.command == "analytic":
            out = cmd_analytic(ns)
        else:
            file_values = {}
            if ns.config:
                try:
                    with open(ns.config, encoding="utf-8") as fh:
                        file_values = parse_config_text(fh.read(), ns.config)
                except OSError as exc:
                    raise ConfigError(f"cannot read {ns.config}: {exc.strerror}") from None
            cfg = resolve_config(file_values, _overrides(ns))
            if ns.command == "simulate":
                out = cmd_simulate(cfg, ns.dump_state)
            elif ns.command == "sweep":
                out = cmd_sweep(cfg)
            elif ns.command == "compare":
                out = cmd_compare(cfg)
            elif ns.command == "rate":
                out = cmd_rate(cfg)
            else:
                out = cmd_rate_mc(cfg)
    except (ConfigError, BogoliubovError, FockStateError) as exc:
        return EXIT_CONFIG, None, f"configuration error: {exc}"
    except NUMERIC_ERRORS as exc:
        return EXIT_NUMERIC, None, f"numerical failure: {exc}"
    if ns.output:
        out.path = ns.output
        with open(ns.output, "w", encoding="utf-8") as fh:
            fh.write(out.text)
    if ns.strict and out.strict_failure:
        return EXIT_STRICT, out, f"strict: {out.strict_failure}"
    return EXIT_OK, out, ""


def main(argv: Sequence[str] | None = None) -> int:
    code, out, message = run(argv)
    if out is not None and out.path is None:
        sys.stdout.write(out.text)
    if message:
        print(message, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
