"""Batch front end: build instances, certify bounds, emit machine-readable reports.

Three subcommands:

``verify``
    Certify one state for one or more truncation thresholds and print report
    rows as CSV.

``sweep``
    Cartesian sweep over threshold (and optionally trailing-block size) lists,
    written to a report file.

``check-props``
    Run the standalone property suites (post-selection reconstruction, gentle
    measurement, tail decay, exponent comparison) on their default grids.

Exit codes: 0 all PASS, 1 any VIOLATION, 2 any INCONCLUSIVE (and none worse),
64 on a usage error.
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .certifier import (
    INCONCLUSIVE,
    VIOLATION,
    Instance,
    check_chernoff_claim,
    check_exponent_sandwich,
    check_gentle,
    verify,
)
from .haar import exact_qubit_rule, monte_carlo_rule, pure_power_moment
from .linalg import Operator, PureState
from .symmetric import dicke_state, ghz_state, random_symmetric_pure, sym_dim, symmetrizer

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64

DESK_SCALE_LIMIT = 2**20
DEFAULT_FALLBACK_TOL = 1e-12

CSV_HEADER = (
    "d,n,k,r,state,lhs,lhs_err,chain_bound,explicit_bound,"
    "g_max,fallback_nodes,nodes,seed,status"
)

_CONFIG_KEYS = (
    "d",
    "n",
    "k",
    "r",
    "state",
    "rule",
    "fallback-tol",
    "output",
    "json",
    "allow-large",
)


class UsageError(Exception):
    """Invalid flags, config, or desk-scale overflow; maps to exit code 64."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class ReportRow:
    d: int
    n: int
    k: int
    r: int
    state: str
    lhs: float
    lhs_err: float
    chain_bound: float
    explicit_bound: float
    g_max: float
    fallback_nodes: int
    nodes: int
    seed: "int | None"
    status: str

    def __post_init__(self):
        for value in (self.lhs, self.lhs_err, self.chain_bound, self.explicit_bound, self.g_max):
            if not math.isfinite(value):
                raise ValueError(f"non-finite report field {value!r}")


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def _csv_field(text: str) -> str:
    if "," in text:
        return '"' + text + '"'
    return text


def row_to_csv(row: ReportRow) -> str:
    seed = "" if row.seed is None else str(row.seed)
    return ",".join(
        [
            str(row.d),
            str(row.n),
            str(row.k),
            str(row.r),
            _csv_field(row.state),
            _fmt(row.lhs),
            _fmt(row.lhs_err),
            _fmt(row.chain_bound),
            _fmt(row.explicit_bound),
            _fmt(row.g_max),
            str(row.fallback_nodes),
            str(row.nodes),
            seed,
            row.status,
        ]
    )


def rows_to_csv_text(rows) -> str:
    return "\n".join([CSV_HEADER] + [row_to_csv(row) for row in rows]) + "\n"


def rows_to_json_text(rows) -> str:
    payload = [
        {
            "d": row.d,
            "n": row.n,
            "k": row.k,
            "r": row.r,
            "state": row.state,
            "lhs": row.lhs,
            "lhs_err": row.lhs_err,
            "chain_bound": row.chain_bound,
            "explicit_bound": row.explicit_bound,
            "g_max": row.g_max,
            "fallback_nodes": row.fallback_nodes,
            "nodes": row.nodes,
            "seed": row.seed,
            "status": row.status,
        }
        for row in rows
    ]
    return json.dumps(payload, indent=2) + "\n"


def _parse_int(name: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"{name} expects an integer, got {text!r}") from None


def _parse_float(name: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"{name} expects a number, got {text!r}") from None


def _parse_int_list(name: str, text: str) -> list:
    items = [part.strip() for part in text.split(",") if part.strip()]
    if not items:
        raise UsageError(f"{name} expects a comma-separated integer list, got {text!r}")
    return [_parse_int(name, part) for part in items]


def parse_state_spec(spec: str, d: int, sites: int):
    """Build the pure state named by SPEC on `sites` sites; returns (state, seed)."""
    name, _, arg = spec.partition(":")
    try:
        if name == "product":
            if arg:
                raise UsageError("state 'product' takes no argument")
            base = PureState(d, 1, [1.0] + [0.0] * (d - 1))
            return base.tensor_power(sites), None
        if name == "ghz":
            if arg:
                raise UsageError("state 'ghz' takes no argument")
            return ghz_state(sites, d), None
        if name == "dicke":
            occupation = tuple(_parse_int("dicke occupation", part) for part in arg.split(","))
            return dicke_state(sites, d, occupation), None
        if name == "random-sym":
            seed = _parse_int("random-sym seed", arg)
            return random_symmetric_pure(sites, d, seed), seed
    except UsageError:
        raise
    except ValueError as exc:
        raise UsageError(f"invalid state spec {spec!r}: {exc}") from None
    raise UsageError(
        f"unknown state spec {spec!r}; expected product, ghz, dicke:OCC, or random-sym:SEED"
    )


def parse_rule_spec(spec: str, d: int, min_degree: int):
    """Build the quadrature rule named by SPEC; returns (rule, mc_seed)."""
    name, _, arg = spec.partition(":")
    if name == "exact":
        if d != 2:
            raise UsageError("exact rules are available only for d=2")
        degree = _parse_int("exact rule degree", arg)
        if degree < min_degree:
            raise UsageError(
                f"exact rule degree {degree} is below n+k={min_degree}; "
                "the certification integrands have that polynomial degree"
            )
        return exact_qubit_rule(degree), None
    if name == "mc":
        parts = arg.split(":")
        if len(parts) not in (1, 2) or not parts[0]:
            raise UsageError(f"invalid rule spec {spec!r}; expected mc:SAMPLES[:SEED]")
        samples = _parse_int("mc samples", parts[0])
        seed = _parse_int("mc seed", parts[1]) if len(parts) == 2 else 0
        if samples < 1:
            raise UsageError("mc samples must be positive")
        return monte_carlo_rule(d, samples, seed=seed), seed
    raise UsageError(f"unknown rule spec {spec!r}; expected exact:DEGREE or mc:SAMPLES[:SEED]")


def read_config_file(path: str) -> dict:
    """Flat key = value file with the same keys as the long flags."""
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key = value, got {raw.rstrip()!r}")
        key = key.strip().replace("_", "-")
        if key not in _CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


def _parse_bool(name: str, text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise UsageError(f"{name} expects true/false, got {text!r}")


def _merge_config(args) -> None:
    if not getattr(args, "config", None):
        return
    values = read_config_file(args.config)
    for key, value in values.items():
        dest = key.replace("-", "_")
        if dest == "allow_large":
            if not args.allow_large:
                args.allow_large = _parse_bool(key, value)
        elif getattr(args, dest, None) is None:
            setattr(args, dest, value)


def _require(args, names) -> None:
    missing = [name for name in names if getattr(args, name.replace("-", "_"), None) is None]
    if missing:
        raise UsageError("missing required settings: " + ", ".join("--" + m for m in missing))


def _check_desk_scale(d: int, sites: int, allow_large: bool) -> None:
    if d**sites > DESK_SCALE_LIMIT and not allow_large:
        raise UsageError(
            f"total dimension d^(n+k) = {d**sites} exceeds the desk-scale limit "
            f"{DESK_SCALE_LIMIT}; pass --allow-large to proceed anyway"
        )


def build_rows(d, n, k_list, r_list, state_spec, rule_spec, fallback_tol, allow_large):
    rows = []
    for k in sorted(set(k_list)):
        if k < 1:
            raise UsageError(f"k must be positive, got {k}")
        sites = n + k
        _check_desk_scale(d, sites, allow_large)
        state, state_seed = parse_state_spec(state_spec, d, sites)
        rule, mc_seed = parse_rule_spec(rule_spec, d, sites)
        seed = state_seed if state_seed is not None else mc_seed
        for r in sorted(set(r_list)):
            if not 0 <= r <= n:
                raise UsageError(f"r must lie in [0, n]; got r={r} with n={n}")
            try:
                inst = Instance(d=d, n=n, k=k, r=r, rho=state.projector(), label=state_spec)
            except ValueError as exc:
                raise UsageError(f"cannot build instance: {exc}") from None
            report = verify(inst, rule, fallback_tol=fallback_tol)
            rows.append(
                ReportRow(
                    d=d,
                    n=n,
                    k=k,
                    r=r,
                    state=state_spec,
                    lhs=report.lhs,
                    lhs_err=report.lhs_integration_error,
                    chain_bound=report.chain_bound,
                    explicit_bound=report.explicit_bound,
                    g_max=report.g_max_value,
                    fallback_nodes=report.fallback_node_count,
                    nodes=rule.node_count,
                    seed=seed,
                    status=report.status,
                )
            )
    rows.sort(key=lambda row: (row.n, row.k, row.r))
    return rows


def _status_exit_code(rows) -> int:
    statuses = {row.status for row in rows}
    if VIOLATION in statuses:
        return EXIT_VIOLATION
    if INCONCLUSIVE in statuses:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None


def cmd_verify(args) -> int:
    _merge_config(args)
    _require(args, ("d", "n", "k", "r", "state", "rule"))
    d = _parse_int("--d", args.d)
    n = _parse_int("--n", args.n)
    k = _parse_int("--k", args.k)
    r_list = _parse_int_list("--r", args.r)
    fallback_tol = (
        DEFAULT_FALLBACK_TOL if args.fallback_tol is None else _parse_float("--fallback-tol", args.fallback_tol)
    )
    rows = build_rows(d, n, [k], r_list, args.state, args.rule, fallback_tol, args.allow_large)
    text = rows_to_csv_text(rows)
    sys.stdout.write(text)
    if args.output is not None:
        _write_text(args.output, text)
    if args.json is not None:
        _write_text(args.json, rows_to_json_text(rows))
    return _status_exit_code(rows)


def cmd_sweep(args) -> int:
    _merge_config(args)
    _require(args, ("d", "n", "k", "r", "state", "rule", "output"))
    d = _parse_int("--d", args.d)
    n = _parse_int("--n", args.n)
    k_list = _parse_int_list("--k", args.k)
    r_list = _parse_int_list("--r", args.r)
    fallback_tol = (
        DEFAULT_FALLBACK_TOL if args.fallback_tol is None else _parse_float("--fallback-tol", args.fallback_tol)
    )
    rows = build_rows(d, n, k_list, r_list, args.state, args.rule, fallback_tol, args.allow_large)
    _write_text(args.output, rows_to_csv_text(rows))
    print(f"wrote {len(rows)} rows to {args.output}")
    if args.json is not None:
        _write_text(args.json, rows_to_json_text(rows))
        print(f"wrote json mirror to {args.json}")
    return _status_exit_code(rows)


def _gentle_suite(pairs: int, seed: int = 0):
    """Seeded random (state, effect) pairs; returns the worst slack rhs - lhs."""
    dims = (2, 3, 4, 8, 16)
    rng = np.random.default_rng(seed)
    worst = math.inf
    for index in range(pairs):
        side = dims[index % len(dims)]
        g = rng.standard_normal((side, side)) + 1j * rng.standard_normal((side, side))
        rho = g @ g.conj().T
        rho /= np.trace(rho).real
        h = rng.standard_normal((side, side)) + 1j * rng.standard_normal((side, side))
        h = h + h.conj().T
        eigs, vecs = np.linalg.eigh(h)
        eigs = (eigs - eigs.min()) / (eigs.max() - eigs.min())
        effect = (vecs * eigs) @ vecs.conj().T
        lhs, rhs = check_gentle(Operator(side, 1, rho), Operator(side, 1, effect))
        worst = min(worst, rhs - lhs)
    return worst


def cmd_check_props(args) -> int:
    del args
    failures = 0

    for n in range(1, 7):
        rule = exact_qubit_rule(n)
        moment = pure_power_moment(rule, n).entries
        target = symmetrizer(n, 2).entries
        err = float(np.max(np.abs(sym_dim(n, 2) * moment - target)))
        ok = err <= 1e-11
        failures += 0 if ok else 1
        print(
            f"post-selection d=2 n={n} {rule.describe()}: "
            f"max entrywise error {err:.3e} (tol 1e-11) {'ok' if ok else 'FAIL'}"
        )

    rule = monte_carlo_rule(3, 100000, seed=0)
    moment = pure_power_moment(rule, 2).entries
    target = symmetrizer(2, 3).entries
    err = float(np.max(np.abs(sym_dim(2, 3) * moment - target)))
    ok = err <= 5e-3
    failures += 0 if ok else 1
    print(
        f"post-selection d=3 n=2 {rule.describe()}: "
        f"max entrywise error {err:.3e} (tol 5e-3) {'ok' if ok else 'FAIL'}"
    )

    slack = _gentle_suite(200)
    ok = slack >= -1e-10
    failures += 0 if ok else 1
    print(
        f"gentle measurement, 200 seeded pairs, dims 2..16: "
        f"min slack {slack:.6g} (needs >= -1e-10) {'ok' if ok else 'FAIL'}"
    )

    min_tail_slack = math.inf
    divergence_ok = True
    for n in range(1, 51):
        for r in range(1, n + 1):
            try:
                min_tail_slack = min(min_tail_slack, check_chernoff_claim(n, r))
            except ArithmeticError:
                divergence_ok = False
    ok = divergence_ok and min_tail_slack >= -1e-12
    failures += 0 if ok else 1
    print(
        f"tail decay claim, n <= 50, all r: min slack {min_tail_slack:.6g}, "
        f"divergence lower bound {'holds' if divergence_ok else 'FAILS'} "
        f"{'ok' if ok else 'FAIL'}"
    )

    pairs = [(n, k) for n in range(1, 51) for k in range(1, 51)]
    ok = check_exponent_sandwich(pairs)
    failures += 0 if ok else 1
    print(f"exponent sandwich, n,k <= 50: {'ok' if ok else 'FAIL'}")

    return EXIT_OK if failures == 0 else EXIT_VIOLATION


def _add_common_flags(sub, k_help):
    sub.add_argument("--d", help="local site dimension")
    sub.add_argument("--n", help="number of retained sites")
    sub.add_argument("--k", help=k_help)
    sub.add_argument("--r", help="comma-separated truncation thresholds, each in [0, n]")
    sub.add_argument(
        "--state",
        help="state spec: product | ghz | dicke:OCC (comma-separated counts) | random-sym:SEED",
    )
    sub.add_argument("--rule", help="integration rule: exact:DEGREE (d=2) | mc:SAMPLES[:SEED]")
    sub.add_argument("--fallback-tol", dest="fallback_tol", help="truncation fallback threshold")
    sub.add_argument("--output", help="write report rows as CSV to this path")
    sub.add_argument("--json", help="write a structured mirror of the rows to this path")
    sub.add_argument("--config", help="flat key = value file; flags override")
    sub.add_argument(
        "--allow-large",
        action="store_true",
        help=f"permit total dimension above {DESK_SCALE_LIMIT}",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="definetti", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", parser_class=_Parser)
    verify_cmd = commands.add_parser("verify", help="certify one state, one row per threshold")
    _add_common_flags(verify_cmd, "number of traced-out sites")
    sweep_cmd = commands.add_parser("sweep", help="cartesian sweep written to a report file")
    _add_common_flags(sweep_cmd, "comma-separated list of traced-out site counts")
    commands.add_parser("check-props", help="run the standalone property suites")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        if args.command == "check-props":
            return cmd_check_props(args)
        raise UsageError("expected a subcommand: verify, sweep, or check-props")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entrypoint() -> None:
    sys.exit(main())
