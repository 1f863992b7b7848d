"""Command-line front end: ``zipper <command> [config.yaml] [options]``.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import yaml

from .channel_sim import (
    ZipperSystem,
    fit_extrapolate,
    gap_report,
    read_points_csv,
    run_sim_point,
    trial_rng,
    write_points_csv,
)
from .galois_bch import make_shortened_bch
from .stall_analysis import (
    StallCensus,
    StallClass,
    build_code_graph,
    census_from_graph,
    count_min_stalls_delayed,
    count_min_stalls_tiled,
    enumerate_cliques,
    error_floor_bound,
    error_pattern_graph,
    min_stall_size,
    to_dot,
)
from .window_decoder import DecoderConfig, apply_truncation
from .zipper_core import (
    check_properties,
    code_rate,
    encode_buffer,
    make_braided7,
    make_delayed_diagonal,
    make_staircase,
    make_tiled_diagonal,
)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

SCHEMA = {
    "code": {"family", "m", "w", "L", "delta", "bch"},
    "code.bch": {"degree", "t", "n"},
    "decoder": {"window_rows", "rounds", "chunk", "schedule", "stride", "fresh_stale", "truncation", "mode"},
    "decoder.truncation": {"J", "tau"},
    "channel": {"p", "min_errors", "max_bits", "max_trials", "seed"},
    "outputs": {"csv", "dot"},
    "": {"code", "decoder", "channel", "outputs"},
}
FAMILIES = ("staircase", "tiled", "delayed", "braided7")


class ConfigError(Exception):
    def __init__(self, msg: str, where: str = ""):
        super().__init__(f"{where}: {msg}" if where else msg)


@dataclass
class Config:
    data: dict
    lines: dict[str, int]
    source: str

    def where(self, path: str) -> str:
        parts = path.split(".")
        while parts:
            key = ".".join(parts)
            if key in self.lines:
                line = self.lines[key]
                return f"{self.source}:{line}" if line else f"--set {key}"
            parts.pop()
        return self.source

    def get(self, path: str, default=None):
        node = self.data
        for part in path.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def require(self, path: str, kind=int):
        value = self.get(path)
        if value is None:
            raise ConfigError(f"missing required key '{path}'", self.where(path))
        return self.typed(path, value, kind)

    def optional(self, path: str, default, kind=int):
        value = self.get(path)
        return default if value is None else self.typed(path, value, kind)

    def typed(self, path, value, kind):
        if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
            raise ConfigError(f"'{path}' must be an integer, got {value!r}", self.where(path))
        if kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"'{path}' must be a number, got {value!r}", self.where(path))
            return float(value)
        if kind is bool and not isinstance(value, bool):
            raise ConfigError(f"'{path}' must be true or false, got {value!r}", self.where(path))
        if kind is str and not isinstance(value, str):
            raise ConfigError(f"'{path}' must be a string, got {value!r}", self.where(path))
        return value


def _record_lines(node, prefix: str, lines: dict[str, int]) -> None:
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            path = f"{prefix}.{key.value}" if prefix else str(key.value)
            lines[path] = key.start_mark.line + 1
            _record_lines(value, path, lines)


def _check_keys(data: dict, lines: dict[str, int], source: str, prefix: str = "") -> None:
    allowed = SCHEMA.get(prefix)
    if allowed is None:
        return
    for key, value in data.items():
        path = f"{prefix}.{key}" if prefix else str(key)
        if key not in allowed:
            line = lines.get(path)
            where = f"{source}:{line}" if line else f"--set {path}"
            raise ConfigError(f"unknown key '{path}' (expected one of {sorted(allowed)})", where)
        if isinstance(value, dict):
            _check_keys(value, lines, source, path)


def parse_config(text: str, source: str = "<config>", overrides=()) -> Config:
    """Parse YAML text, apply ``key.path=value`` overrides and check key names."""
    try:
        loader = yaml.SafeLoader(text)
        try:
            node = loader.get_single_node()
            data = loader.construct_document(node) if node is not None else {}
        finally:
            loader.dispose()
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark else source
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}", where) from None
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", source)
    lines: dict[str, int] = {}
    if node is not None:
        _record_lines(node, "", lines)
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"override {item!r} is not key=value", "--set")
        target = data
        parts = key.split(".")
        for part in parts[:-1]:
            target = target.setdefault(part, {})
            if not isinstance(target, dict):
                raise ConfigError(f"cannot set '{key}': '{part}' is not a section", "--set")
        target[parts[-1]] = yaml.safe_load(raw)
        lines[key] = 0
    _check_keys(data, lines, source)
    return Config(data, lines, source)


def load_config(path: str, overrides=()) -> Config:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path) from None
    return parse_config(text, path, overrides)


def build_code(cfg: Config):
    """(spec, imap) from the ``code`` section, validated against the constituent code."""
    family = cfg.require("code.family", str)
    if family not in FAMILIES:
        raise ConfigError(f"code.family must be one of {FAMILIES}, got {family!r}", cfg.where("code.family"))
    if family == "braided7":
        return make_braided7()
    try:
        code = make_shortened_bch(
            cfg.require("code.bch.degree"), cfg.require("code.bch.t"), cfg.require("code.bch.n")
        )
    except ValueError as exc:
        raise ConfigError(str(exc), cfg.where("code.bch")) from None
    try:
        if family == "staircase":
            return make_staircase(cfg.require("code.m"), code)
        if family == "tiled":
            w = cfg.optional("code.w", 1)
            L = cfg.get("code.L")
            if L is None:
                m = cfg.require("code.m")
                if m % w:
                    raise ConfigError(f"code.m={m} is not a multiple of code.w={w}", cfg.where("code.m"))
                L = m // w
            return make_tiled_diagonal(w, cfg.typed("code.L", L, int), code)
        return make_delayed_diagonal(cfg.require("code.m"), cfg.optional("code.delta", 1), code)
    except ValueError as exc:
        raise ConfigError(str(exc), cfg.where("code")) from None


def build_decoder(cfg: Config, spec, imap) -> DecoderConfig:
    trunc = None
    if cfg.get("decoder.truncation") is not None:
        trunc = (cfg.require("decoder.truncation.J"), cfg.require("decoder.truncation.tau"))
    dec = DecoderConfig(
        window_rows=cfg.require("decoder.window_rows"),
        max_rounds=cfg.optional("decoder.rounds", 5),
        chunk_rows=cfg.optional("decoder.chunk", None),
        schedule=cfg.optional("decoder.schedule", "exhaustive", str),
        stride=cfg.optional("decoder.stride", 1),
        fresh_stale=cfg.optional("decoder.fresh_stale", True, bool),
        truncation=trunc,
        mode=cfg.optional("decoder.mode", "bounded", str),
    )
    try:
        return dec.resolved(spec, imap)
    except ValueError as exc:
        raise ConfigError(str(exc), cfg.where("decoder")) from None


def resolve_seed(args, cfg: Config | None) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("ZIPPER_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"ZIPPER_SEED={env!r} is not an integer") from None
    if cfg is not None and cfg.get("channel.seed") is not None:
        return cfg.require("channel.seed")
    return 0


def _parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise ConfigError(f"row range {text!r} must look like LO:HI") from None
    if not 0 <= lo < hi:
        raise ConfigError(f"row range {text!r} must satisfy 0 <= LO < HI")
    return lo, hi


def _parse_rate(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"rate {text!r} is not a number or fraction") from None


def _output(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_rate(args) -> int:
    cfg = load_config(args.config, args.set)
    spec, imap = build_code(cfg)
    rate = code_rate(spec)
    print(f"rate = {rate} = {float(rate):.6f}")
    if cfg.get("decoder.truncation") is not None:
        dec = build_decoder(cfg, spec, imap)
        eff = apply_truncation(spec, dec).effective_rate()
        print(f"effective rate with truncation = {eff} = {float(eff):.6f}")
    return EXIT_OK


def cmd_encode(args) -> int:
    cfg = load_config(args.config, args.set)
    spec, imap = build_code(cfg)
    if not check_properties(imap, spec).causal:
        raise ConfigError("encoding needs a causal map", cfg.where("code.family"))
    rng = trial_rng(resolve_seed(args, cfg), 0)
    nbits = sum(spec.info_width(i) for i in range(args.rows))
    message = rng.integers(0, 2, nbits, dtype=np.uint8)
    rows = encode_buffer(spec, imap, message, num_rows=args.rows)
    out = [f"# {args.rows} rows, real parts only, message bits first"]
    out += ["".join(map(str, row[spec.m(i):])) for i, row in enumerate(rows)]
    _output("\n".join(out) + "\n", args.out)
    return EXIT_OK


def simulate_csv(cfg: Config, seed: int, workers: int) -> str:
    spec, imap = build_code(cfg)
    dec = build_decoder(cfg, spec, imap)
    ps = cfg.get("channel.p")
    if ps is None:
        raise ConfigError("missing required key 'channel.p'", cfg.where("channel"))
    ps = ps if isinstance(ps, list) else [ps]
    ps = [cfg.typed("channel.p", p, float) for p in ps]
    for p in ps:
        if not 0.0 <= p <= 0.5:
            raise ConfigError(f"crossover probability {p} outside [0, 1/2]", cfg.where("channel.p"))
    frame = None if dec.truncation else dec.window_rows * 2
    system = ZipperSystem(spec, imap, dec, frame_rows=frame)
    points = [
        run_sim_point(
            system, p, seed,
            min_errors=cfg.optional("channel.min_errors", 100),
            max_bits=cfg.optional("channel.max_bits", 10**7),
            max_trials=cfg.optional("channel.max_trials", None),
            workers=workers,
        )
        for p in ps
    ]
    return write_points_csv(points)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, args.set)
    text = simulate_csv(cfg, resolve_seed(args, cfg), args.workers)
    _output(text, args.out or cfg.get("outputs.csv"))
    return EXIT_OK


def cmd_extrapolate(args) -> int:
    try:
        with open(args.csv, encoding="utf-8") as fh:
            points = read_points_csv(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read CSV: {exc.strerror}", args.csv) from None
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad CSV: {exc}", args.csv) from None
    p_star = fit_extrapolate(points, args.target, args.ber_ceiling)
    print(f"p_star = {p_star:.6e}")
    if args.rate:
        print(gap_report(p_star, _parse_rate(args.rate)), end="")
    return EXIT_OK


def cmd_gap(args) -> int:
    print(gap_report(args.p_star, _parse_rate(args.rate)), end="")
    return EXIT_OK


def _stall_t(cfg: Config) -> int:
    return cfg.require("code.bch.t")


def cmd_stall_count(args) -> int:
    cfg = load_config(args.config, args.set)
    family = cfg.require("code.family", str)
    t = _stall_t(cfg)
    print(f"minimum stall size = {min_stall_size(t)}")
    if family == "tiled":
        w = cfg.optional("code.w", 1)
        L = cfg.optional("code.L", None) or cfg.require("code.m") // w
        M = cfg.require("decoder.window_rows")
        if M % w:
            raise ConfigError(f"window_rows={M} is not a multiple of w={w}", cfg.where("decoder.window_rows"))
        try:
            exact, approx = count_min_stalls_tiled(L, M // w, w, t)
        except ValueError as exc:
            raise ConfigError(str(exc), cfg.where("code")) from None
        print(f"tiled L={L} K={M // w} w={w} t={t}: exact = {exact}, approximation = {approx}")
    elif family == "delayed":
        m, M = cfg.require("code.m"), cfg.require("decoder.window_rows")
        deltas = [cfg.optional("code.delta", 1)]
        if args.delta_range:
            lo, hi = _parse_range(args.delta_range)
            deltas = range(max(lo, 1), hi)
            print("delta,exists,per_anchor,window_bound")
        for d in deltas:
            exists, per, bound = count_min_stalls_delayed(m, d, t, M)
            if args.delta_range:
                print(f"{d},{int(exists)},{per},{bound}")
            else:
                print(f"delayed m={m} delta={d} t={t}: exists = {exists}, "
                      f"per anchor = {per}, window bound (M={M}) = {bound}")
    else:
        raise ConfigError(f"no counting formula for family {family!r}; use 'stall enumerate'",
                          cfg.where("code.family"))
    return EXIT_OK


def cmd_stall_enumerate(args) -> int:
    cfg = load_config(args.config, args.set)
    spec, imap = build_code(cfg)
    t = spec.codes[0].t
    size = args.size or t + 2
    graph = build_code_graph(imap, spec, _parse_range(args.rows))
    if not graph.is_simple:
        raise ConfigError("clique enumeration needs a scattering map", cfg.where("code.family"))
    res = enumerate_cliques(graph, size, cap=args.cap)
    print(f"{size}-cliques in rows [{graph.row_lo}, {graph.row_hi}): {res.count}"
          + (" (truncated at cap)" if res.truncated else ""))
    for c in res.cliques[: args.show]:
        print(" ".join(map(str, c)))
    if args.dot and res.cliques:
        clique = set(res.cliques[0])
        errors = [p for (u, v), syms in graph.symbols.items() if u in clique and v in clique for p in syms]
        eg = error_pattern_graph(imap, spec, errors, row_range=(graph.row_lo, graph.row_hi))
        _output(to_dot(eg, t=t, name="stall"), args.dot)
    return EXIT_OK


def cmd_stall_floor(args) -> int:
    cfg = load_config(args.config, args.set)
    family = cfg.require("code.family", str)
    t = _stall_t(cfg)
    M = cfg.require("decoder.window_rows")
    method = args.method
    if method == "formula" and family not in ("tiled", "delayed"):
        raise ConfigError(f"no counting formula for family {family!r}; use --method graph",
                          cfg.where("code.family"))
    if method == "formula":
        m = cfg.get("code.m")
        if family == "tiled":
            w = cfg.optional("code.w", 1)
            L = cfg.optional("code.L", None) or cfg.require("code.m") // w
            m = L * w
            exact, _ = count_min_stalls_tiled(L, M // w, w, t)
            classes = (StallClass(min_stall_size(t), exact, True),)
        else:
            m = cfg.require("code.m")
            _, _, bound = count_min_stalls_delayed(m, cfg.optional("code.delta", 1), t, M)
            classes = (StallClass(min_stall_size(t), bound, False),)
        census = StallCensus(tuple(c for c in classes if c.count), M, m, t)
    else:
        spec, imap = build_code(cfg)
        graph = build_code_graph(imap, spec, (0, M))
        census = census_from_graph(graph, t, M, max(spec.virtual), cycles4=(t == 1), cap=args.cap)
    if not census.classes:
        print("no minimum-size stall patterns: floor estimate not available from this census")
        return EXIT_OK
    print("size,count,exact")
    for c in census.classes:
        print(f"{c.size},{c.count},{int(c.exact)}")
    for p in args.p:
        est = error_floor_bound(census, p)
        print(f"p={p:.3e}: bound={est.bound:.4e} dominant_size={est.dominant_size} "
              f"dominant_term={est.dominant_term:.4e} dominant_ber={est.dominant_ber:.4e}")
    return EXIT_OK


def cmd_graph_export(args) -> int:
    cfg = load_config(args.config, args.set)
    spec, imap = build_code(cfg)
    rows = _parse_range(args.rows)
    if args.errors:
        try:
            errors = [tuple(int(x) for x in item.split(",")) for item in args.errors.split(";") if item]
        except ValueError:
            raise ConfigError(f"errors {args.errors!r} must look like 'i,k;i,k'") from None
        t = spec.codes[0].t
        graph = error_pattern_graph(imap, spec, errors, row_range=rows)
        text = to_dot(graph, t=t, name="errors")
    else:
        text = to_dot(build_code_graph(imap, spec, rows), name="code")
    _output(text, args.out or cfg.get("outputs.dot"))
    return EXIT_OK


def cmd_props(args) -> int:
    cfg = load_config(args.config, args.set)
    spec, imap = build_code(cfg)
    props = check_properties(imap, spec)
    rows = [("family", imap.kind), ("period", imap.period), ("reach", imap.reach)]
    rows += [(name, getattr(props, name)) for name in ("causal", "strictly_causal", "periodic", "bijective", "scattering")]
    for name, value in rows:
        print(f"{name:<15} = {value}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (default: $ZIPPER_SEED, then channel.seed)")
    common.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config scalar, e.g. decoder.rounds=3")

    parser = argparse.ArgumentParser(prog="zipper", description="Zipper code toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, parent=sub, config=True):
        p = parent.add_parser(name, parents=[common], help=help_)
        if config:
            p.add_argument("config", help="YAML experiment config")
        p.set_defaults(func=func)
        return p

    add("rate", cmd_rate, "print the code rate")
    p = add("encode", cmd_encode, "encode a random message")
    p.add_argument("--rows", type=int, default=8)
    p.add_argument("--out")
    p = add("simulate", cmd_simulate, "BSC Monte Carlo, CSV output")
    p.add_argument("--out")
    p = add("extrapolate", cmd_extrapolate, "fit the waterfall and extrapolate", config=False)
    p.add_argument("csv")
    p.add_argument("--target", type=float, default=1e-15)
    p.add_argument("--ber-ceiling", type=float, default=None)
    p.add_argument("--rate", help="also print the gap report for this rate")
    p = add("gap", cmd_gap, "gap to the Shannon limit", config=False)
    p.add_argument("--p-star", type=float, required=True)
    p.add_argument("--rate", required=True)

    stall = sub.add_parser("stall", help="stall pattern analysis")
    ssub = stall.add_subparsers(dest="stall_command", required=True)
    p = add("count", cmd_stall_count, "minimum-size stall counts", parent=ssub)
    p.add_argument("--delta-range", help="delayed family: sweep delta over LO:HI")
    p = add("enumerate", cmd_stall_enumerate, "enumerate cliques of the code graph", parent=ssub)
    p.add_argument("--rows", default="0:16")
    p.add_argument("--size", type=int, default=None, help="clique size (default t+2)")
    p.add_argument("--cap", type=int, default=100_000)
    p.add_argument("--show", type=int, default=10)
    p.add_argument("--dot", help="write the first clique as a DOT stall pattern")
    p = add("floor", cmd_stall_floor, "error-floor estimate", parent=ssub)
    p.add_argument("--p", type=float, action="append", required=True)
    p.add_argument("--method", choices=("formula", "graph"), default="formula")
    p.add_argument("--cap", type=int, default=None)

    graph = sub.add_parser("graph", help="graph export")
    gsub = graph.add_subparsers(dest="graph_command", required=True)
    p = add("export", cmd_graph_export, "write the code or error graph as DOT", parent=gsub)
    p.add_argument("--rows", default="0:16")
    p.add_argument("--errors", help="error positions 'i,k;i,k' (real positions)")
    p.add_argument("--out")

    add("props", cmd_props, "interleaver map properties")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
