"""Command line front end.

Every subcommand streams line-delimited JSON records.  Rationals are emitted
as exact ``"p/q"`` strings; ``--floats`` adds advisory float renderings that
are never read back.  Exit status: 0 on success, 1 when a verification suite
fails, 2 on invalid input.

    nilbohr return-set --alpha 1/2 --alpha 1/2 --epsilon 3/10 --window 1:8
    nilbohr sgd --P 1,2,4 --d 1
    nilbohr verify --suite power --seed 0
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, TextIO

from . import genpoly as G
from . import nildyn as N
from . import setfam as S
from . import unipotent as U
from . import verify as V
from .syntax import GPSyntaxError, parse_gp, parse_rational_expr

__all__ = ["ConfigError", "ExperimentConfig", "ResultRecord", "KINDS", "run", "main", "build_parser"]

KINDS = ("eval", "power", "reduce", "orbit", "return-set", "multi-return",
         "progressions", "sgd", "level-set", "verify")

# kinds whose records depend on n alone, so the window can be split across workers
_POINTWISE = {"eval", "power", "orbit", "return-set", "multi-return", "level-set"}


class ConfigError(ValueError):
    """Invalid input; ``field`` names the offending parameter."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


# ---------------------------------------------------------------------------
# records


def _q(x) -> str:
    return str(Fraction(x))


def _table(items) -> Dict[str, str]:
    return {f"{i},{k}": _q(v) for (i, k), v in items}


@dataclass
class ResultRecord:
    """One output row: the producing operation, a key (``n`` or ``id``),
    exact values and optional float renderings."""

    op: str
    key: Dict[str, Any]
    values: Dict[str, Any] = field(default_factory=dict)
    approx: Optional[Dict[str, float]] = None

    def to_dict(self) -> Dict[str, Any]:
        out = {"op": self.op, **self.key, **self.values}
        if self.approx is not None:
            out["approx"] = self.approx
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))


def _with_floats(rec: ResultRecord, floats: bool, **vals) -> ResultRecord:
    if floats:
        rec.approx = {k: float(Fraction(v)) for k, v in vals.items()}
    return rec


# ---------------------------------------------------------------------------
# configuration

_DEFAULTS = {"seed": 0, "grid": 64, "format": "jsonl", "jobs": 1, "system": "nil",
             "floats": False}


def _as_list(value, fieldname) -> List:
    if value is None:
        return []
    if isinstance(value, str):
        return [v for v in value.replace(",", " ").split() if v]
    if isinstance(value, (list, tuple)):
        out = []
        for v in value:
            out.extend(_as_list(v, fieldname) if isinstance(v, str) else [v])
        return out
    return [value]


def _rational(value, fieldname) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise ConfigError(fieldname, f"{value!r} is not an exact rational; write it as p/q")
    if isinstance(value, int):
        return Fraction(value)
    try:
        return parse_rational_expr(str(value))
    except (GPSyntaxError, ZeroDivisionError) as exc:
        raise ConfigError(fieldname, f"cannot parse {value!r} as a rational ({exc})") from None


def _integer(value, fieldname) -> int:
    if isinstance(value, bool):
        raise ConfigError(fieldname, f"{value!r} is not an integer")
    try:
        q = _rational(value, fieldname)
    except ConfigError:
        raise ConfigError(fieldname, f"{value!r} is not an integer") from None
    if q.denominator != 1:
        raise ConfigError(fieldname, f"{value!r} is not an integer")
    return int(q)


def _window(value) -> tuple:
    try:
        if isinstance(value, (list, tuple)):
            return S.as_window(tuple(_integer(v, "window") for v in value))
        return S.as_window(str(value))
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("window", str(exc)) from None


@dataclass
class ExperimentConfig:
    """``kind`` plus a raw parameter map; :meth:`validated` parses it exactly."""

    kind: str
    params: Dict[str, Any] = field(default_factory=dict)

    def validated(self) -> Dict[str, Any]:
        if self.kind not in KINDS:
            raise ConfigError("kind", f"unknown kind {self.kind!r}; choose from {', '.join(KINDS)}")
        raw = {**_DEFAULTS, **{k: v for k, v in self.params.items() if v is not None}}
        p: Dict[str, Any] = {"kind": self.kind}
        p["seed"] = _integer(raw["seed"], "seed")
        p["grid"] = _integer(raw["grid"], "grid")
        if p["grid"] < 1:
            raise ConfigError("grid", "must be >= 1")
        p["jobs"] = _integer(raw["jobs"], "jobs")
        if p["jobs"] < 1:
            raise ConfigError("jobs", "must be >= 1")
        if raw["format"] not in ("jsonl", "csv"):
            raise ConfigError("format", f"unknown format {raw['format']!r}")
        p["format"] = raw["format"]
        if raw["system"] not in ("nil", "torus"):
            raise ConfigError("system", f"unknown system {raw['system']!r}")
        p["system"] = raw["system"]
        p["floats"] = bool(raw["floats"])
        p["alpha"] = tuple(_rational(a, "alpha") for a in _as_list(raw.get("alpha"), "alpha"))
        p["theta"] = tuple(_rational(a, "theta") for a in _as_list(raw.get("theta"), "theta"))
        p["entries"] = tuple(_rational(a, "entries") for a in _as_list(raw.get("entries"), "entries"))
        p["d"] = _integer(raw["d"], "d") if raw.get("d") is not None else None
        if p["d"] is not None and p["d"] < 1:
            raise ConfigError("d", "must be >= 1")
        p["order"] = _integer(raw["order"], "order") if raw.get("order") is not None else None
        p["epsilon"] = _rational(raw["epsilon"], "epsilon") if raw.get("epsilon") is not None else None
        if p["epsilon"] is not None and p["epsilon"] <= 0:
            raise ConfigError("epsilon", "must be positive")
        p["window"] = _window(raw["window"]) if raw.get("window") is not None else None
        p["P"] = tuple(_integer(v, "P") for v in _as_list(raw.get("P"), "P"))
        p["members"] = tuple(_integer(v, "members") for v in _as_list(raw.get("members"), "members"))
        p["suite"] = tuple(_as_list(raw.get("suite"), "suite"))
        p["expr"] = raw.get("expr")
        constraints = raw.get("constraint") or []
        if isinstance(constraints, str):
            constraints = [constraints]
        p["constraint"] = tuple(constraints)
        _CHECKS[self.kind](p)
        return p


def _need(p, *names):
    for name in names:
        if p.get(name) in (None, ()):
            raise ConfigError(name, f"required for {p['kind']}")


def _nil_alpha(p):
    _need(p, "alpha")
    if p["d"] is not None and p["d"] != len(p["alpha"]):
        raise ConfigError("d", f"d={p['d']} but {len(p['alpha'])} alpha values were given")
    p["d"] = len(p["alpha"])


def _torus_setup(p):
    _need(p, "d", "alpha")
    if len(p["alpha"]) != 1:
        raise ConfigError("alpha", "the torus map takes a single rotation number")
    if p["theta"] and len(p["theta"]) != p["d"]:
        raise ConfigError("theta", f"expected {p['d']} coordinates")


def _check_eval(p):
    _need(p, "window")
    if p["expr"] is not None:
        try:
            p["gp"] = parse_gp(p["expr"])
        except (GPSyntaxError, ValueError) as exc:
            raise ConfigError("expr", str(exc)) from None
    elif not p["alpha"]:
        raise ConfigError("expr", "give --expr, or --alpha for the master polynomial")


def _check_power(p):
    _need(p, "window")
    if p["entries"]:
        p["matrix"] = _matrix(p)
    else:
        _nil_alpha(p)


def _matrix(p) -> U.UTMatrix:
    m = len(p["entries"])
    d = p["d"]
    if d is None:
        # d(d+1)/2 = m
        d = int(((8 * m + 1) ** 0.5 - 1) / 2)
    if d * (d + 1) // 2 != m:
        raise ConfigError("entries", f"{m} entries do not fill an upper-triangular matrix of dim {d}")
    p["d"] = d
    return U.UTMatrix(d, p["entries"])


def _check_reduce(p):
    _need(p, "entries")
    p["matrix"] = _matrix(p)


def _check_orbit(p):
    _need(p, "window")
    if p["system"] == "torus":
        _torus_setup(p)
    else:
        _nil_alpha(p)


def _check_return(p):
    _need(p, "window", "epsilon")
    if p["system"] == "torus":
        _torus_setup(p)
        if p["epsilon"] > Fraction(1, 2):
            raise ConfigError("epsilon", "torus boxes need half-widths in (0, 1/2]")
    else:
        _nil_alpha(p)


def _check_multi(p):
    _check_return(p)
    if p["order"] is None:
        p["order"] = p["d"]
    if p["order"] < 1:
        raise ConfigError("order", "must be >= 1")


def _check_progressions(p):
    _need(p, "window")
    if p["order"] is None:
        p["order"] = p["d"] if p["d"] is not None else 1
    if p["order"] < 1:
        raise ConfigError("order", "must be >= 1")


def _check_sgd(p):
    _need(p, "P", "d")
    if any(v < 1 for v in p["P"]):
        raise ConfigError("P", "entries must be positive integers")


def _check_level(p):
    _need(p, "window", "constraint")
    cons = []
    for text in p["constraint"]:
        expr_text, sep, eps_text = text.rpartition(":")
        if not sep:
            raise ConfigError("constraint", f"{text!r} should look like 'EXPR : EPS'")
        try:
            expr = parse_gp(expr_text)
        except (GPSyntaxError, ValueError) as exc:
            raise ConfigError("constraint", f"{text!r}: {exc}") from None
        eps = _rational(eps_text.strip(), "constraint")
        if eps <= 0:
            raise ConfigError("constraint", f"{text!r}: epsilon must be positive")
        cons.append((expr, eps))
    p["spec"] = G.LevelSetSpec(tuple(cons))


def _check_verify(p):
    known = set(V.SUITES) | set(V.EXTRA_SUITES)
    names = p["suite"] or tuple(V.SUITES)
    if "all" in names:
        names = tuple(V.SUITES)
    for name in names:
        if name not in known:
            raise ConfigError("suite", f"unknown suite {name!r}; choose from {', '.join(sorted(known))}")
    p["suite"] = names


_CHECKS = {
    "eval": _check_eval, "power": _check_power, "reduce": _check_reduce,
    "orbit": _check_orbit, "return-set": _check_return, "multi-return": _check_multi,
    "progressions": _check_progressions, "sgd": _check_sgd, "level-set": _check_level,
    "verify": _check_verify,
}


# ---------------------------------------------------------------------------
# computations


def _torus(p):
    T = N.TorusAffine(p["d"], p["alpha"][0])
    start = N.TorusPoint(p["theta"]) if p["theta"] else N.TorusPoint.origin(p["d"])
    return T, start


def _pointwise(p, lo: int, hi: int) -> List[ResultRecord]:
    """Records for ``n`` in ``[lo, hi]``; must not depend on anything outside it."""
    kind, floats = p["kind"], p["floats"]
    out = []
    if kind == "eval":
        for n in range(lo, hi + 1):
            if "gp" in p:
                v = p["gp"].evaluate(n)
                out.append(_with_floats(ResultRecord("eval_gp", {"n": n}, {"value": _q(v)}), floats, value=v))
            else:
                v = G.eval_P(n, p["alpha"])
                out.append(_with_floats(ResultRecord("eval_P", {"n": n}, {"value": _q(v)}), floats, value=v))
    elif kind == "power":
        for n in range(lo, hi + 1):
            if "matrix" in p:
                M, op = U.pow_general(p["matrix"], n), "pow_general"
            else:
                M, op = U.pow_closed(p["alpha"], n), "pow_closed"
            out.append(ResultRecord(op, {"n": n}, {"entries": _table(M.items())}))
    elif kind == "orbit" and p["system"] == "torus":
        T, start = _torus(p)
        for n in range(lo, hi + 1):
            pt = N.torus_iterate(T, start, n)
            out.append(ResultRecord("torus_iterate", {"n": n}, {"coords": [_q(c) for c in pt.coords]}))
    elif kind == "orbit":
        rot = N.NilRotation(p["alpha"])
        for n in range(lo, hi + 1):
            tab = N.fz_tables(rot, n)
            rec = ResultRecord("fz_tables", {"n": n}, {
                "f": {f"{i},{k}": v for (i, k), v in tab.f.items()},
                "z": _table(tab.z.items()), "max_abs": _q(tab.max_abs)})
            out.append(_with_floats(rec, floats, max_abs=tab.max_abs))
    elif kind == "return-set" and p["system"] == "torus":
        T, start = _torus(p)
        box = N.Box.cube(p["d"], p["epsilon"])
        for n in range(lo, hi + 1):
            pt = N.torus_iterate(T, start, n)
            if pt in box:
                out.append(ResultRecord("torus_return_set", {"n": n}, {"coords": [_q(c) for c in pt.coords]}))
    elif kind == "return-set":
        rot = N.NilRotation(p["alpha"])
        for n in range(lo, hi + 1):
            tab = N.fz_tables(rot, n)
            if tab.max_abs < p["epsilon"]:
                rec = ResultRecord("nil_return_set", {"n": n}, {"max_abs": _q(tab.max_abs)})
                out.append(_with_floats(rec, floats, max_abs=tab.max_abs))
    elif kind == "multi-return" and p["system"] == "torus":
        T = N.TorusAffine(p["d"], p["alpha"][0])
        found = N.multi_return_set(T, N.Box.cube(p["d"], p["epsilon"]), p["order"], (lo, hi), p["grid"])
        out = [ResultRecord("multi_return_set", {"n": n}) for n in found]
    elif kind == "multi-return":
        rot = N.NilRotation(p["alpha"])
        found = N.nil_multi_return_set(rot, p["epsilon"], p["order"], (lo, hi), grid=p["grid"])
        out = [ResultRecord("nil_multi_return_set", {"n": n}) for n in found]
    elif kind == "level-set":
        spec = p["spec"]
        for n in range(lo, hi + 1):
            if spec.contains(n):
                vals = [expr.evaluate(n) for expr, _ in spec.constraints]
                out.append(ResultRecord("level_set", {"n": n}, {"values": [_q(v) for v in vals]}))
    return out


def _pointwise_job(args):
    p, lo, hi = args
    return [r.to_dict() for r in _pointwise(p, lo, hi)]


def _chunks(lo: int, hi: int, parts: int):
    size = hi - lo + 1
    parts = max(1, min(parts, size))
    bounds = [lo + size * j // parts for j in range(parts + 1)]
    return [(bounds[j], bounds[j + 1] - 1) for j in range(parts)]


def _records(p) -> tuple:
    """(records, exit status, human-readable lines for stderr)."""
    kind = p["kind"]
    if kind in _POINTWISE:
        lo, hi = p["window"]
        if p["jobs"] > 1:
            jobs = [(p, a, b) for a, b in _chunks(lo, hi, p["jobs"])]
            with ProcessPoolExecutor(max_workers=p["jobs"]) as pool:
                # map preserves submission order, so the merge is sorted by n
                parts = list(pool.map(_pointwise_job, jobs))
            return [rec for part in parts for rec in part], 0, []
        return [r.to_dict() for r in _pointwise(p, lo, hi)], 0, []
    if kind == "reduce":
        red = U.reduce_mod_lattice(p["matrix"])
        rec = ResultRecord("reduce_mod_lattice", {"id": "input"},
                           {"rep": _table(red.rep.items()), "lattice": _table(red.lattice.items()),
                            "max_abs": _q(red.max_abs)})
        return [rec.to_dict()], 0, []
    if kind == "progressions":
        lo, hi = p["window"]
        cds = S.common_difference_set(S.IndexSet(lo, hi, p["members"]), p["order"])
        return [ResultRecord("common_difference_set", {"n": n}, {"order": p["order"]}).to_dict()
                for n in cds], 0, []
    if kind == "sgd":
        found = S.sg_d(p["P"], p["d"], p["window"])
        return [ResultRecord("sg_d", {"n": n}).to_dict() for n in found], 0, []
    if kind == "verify":
        return _verify(p)
    raise AssertionError(kind)


def _suite_job(args):
    name, seed = args
    return V.run_suite(name, seed)


def _verify(p):
    jobs = [(name, p["seed"]) for name in p["suite"]]
    if p["jobs"] > 1:
        with ProcessPoolExecutor(max_workers=p["jobs"]) as pool:
            results = list(pool.map(_suite_job, jobs))
    else:
        results = [_suite_job(j) for j in jobs]
    records, lines = [], []
    for res in results:
        for t in res.trials:
            records.append(ResultRecord("verify", {"suite": res.name}, dict(t)).to_dict())
        # timings vary run to run, so they stay out of the records
        records.append(ResultRecord("verify", {"suite": res.name}, {
            "passed": res.passed, "checks": res.checks, "failure": res.failure,
            "notes": list(res.notes)}).to_dict())
        lines.append(res.line())
        lines.extend(f"    note: {note}" for note in res.notes)
    return records, 0 if all(r.passed for r in results) else 1, lines


def _flatten(value) -> str:
    if isinstance(value, dict):
        return ";".join(f"{k}={_flatten(v)}" for k, v in value.items())
    if isinstance(value, list):
        return " ".join(_flatten(v) for v in value)
    if value is None:
        return ""
    return str(value)


def _write(records: List[dict], fmt: str, sink: TextIO):
    if fmt == "jsonl":
        for rec in records:
            sink.write(json.dumps(rec, separators=(",", ":")) + "\n")
        return
    columns: List[str] = []
    for rec in records:
        columns.extend(k for k in rec if k not in columns)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([_flatten(rec.get(col)) for col in columns])
    sink.write(buf.getvalue())


def run(config: ExperimentConfig, sink: TextIO = None, log: TextIO = None) -> int:
    """Validate ``config``, stream its records to ``sink`` and return the exit status."""
    sink = sys.stdout if sink is None else sink
    log = sys.stderr if log is None else log
    try:
        p = config.validated()
    except ConfigError as exc:
        log.write(f"error: {exc}\n")
        return 2
    records, status, lines = _records(p)
    _write(records, p["format"], sink)
    for line in lines:
        log.write(line + "\n")
    return status


# ---------------------------------------------------------------------------
# argument parsing


def _load_config(path: str) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    if path.endswith((".yaml", ".yml")):
        import yaml

        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f" at line {mark.line + 1}" if mark else ""
            raise ConfigError("config", f"{path}{where}: invalid YAML") from None
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"{path} line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config", f"{path}: top level must be a mapping")
    return {str(k).replace("-", "_"): v for k, v in data.items()}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # defaults are None so that config-file values survive unless a flag is given
    common.add_argument("--config", help="JSON or YAML file of parameters; flags win")
    common.add_argument("--d", type=str, help="dimension / step count")
    common.add_argument("--alpha", action="append", help="rational p/q; repeat for a vector")
    common.add_argument("--epsilon", help="rational threshold")
    common.add_argument("--window", help="closed integer window LO:HI")
    common.add_argument("--grid", help="witness grid resolution (default 64)")
    common.add_argument("--seed", help="random seed for suites (default 0)")
    common.add_argument("--format", choices=("jsonl", "csv"))
    common.add_argument("--jobs", help="worker processes (default 1)")
    common.add_argument("--floats", action="store_true", default=None, help="add float renderings")

    parser = argparse.ArgumentParser(prog="nilbohr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="kind", required=True, metavar="KIND")

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    p = add("eval", "evaluate a generalized polynomial (or the master polynomial) over a window")
    p.add_argument("--expr", help="expression in n, brackets as [ ]")
    p = add("power", "powers A**n of a generator")
    p.add_argument("--entries", action="append", help="upper-triangular entries, superdiagonal by superdiagonal")
    p = add("reduce", "reduce a matrix into the fundamental domain")
    p.add_argument("--entries", action="append")
    for name, help_text in (("orbit", "orbit data: f/z tables or torus iterates"),
                            ("return-set", "return times to an epsilon neighbourhood"),
                            ("multi-return", "witnessed multiple-return times")):
        p = add(name, help_text)
        p.add_argument("--system", choices=("nil", "torus"))
        p.add_argument("--theta", action="append", help="torus starting point coordinate")
        if name == "multi-return":
            p.add_argument("--order", help="number of returns (default d)")
    p = add("progressions", "common differences of progressions inside a set")
    p.add_argument("--members", action="append", help="comma-separated members")
    p.add_argument("--order", help="progression length minus one (default 1)")
    p = add("sgd", "sums with gaps SG_d(P)")
    p.add_argument("--P", action="append", help="comma-separated positive integers")
    p = add("level-set", "joint level set of generalized polynomials")
    p.add_argument("--constraint", action="append", help="'EXPR : EPS'; repeat for a conjunction")
    p = add("verify", "run the verification suites")
    p.add_argument("--suite", action="append", help="suite name; repeatable (default all)")
    return parser


def _glue_negative_values(argv: Sequence[str]) -> List[str]:
    # argparse reads "-40:40" as an option; glue such values onto their flag
    out: List[str] = []
    it = iter(argv)
    for tok in it:
        if tok in ("--window", "--alpha", "--theta", "--entries", "--epsilon", "--members"):
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and len(nxt) > 1 and (nxt[1].isdigit() or nxt[1] in "(["):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def config_from_args(argv: Optional[Sequence[str]] = None) -> ExperimentConfig:
    argv = _glue_negative_values(sys.argv[1:] if argv is None else list(argv))
    args = vars(build_parser().parse_args(argv))
    kind = args.pop("kind")
    path = args.pop("config")
    params = _load_config(path) if path else {}
    file_kind = params.pop("kind", None)
    if file_kind is not None and file_kind != kind:
        raise ConfigError("kind", f"config file is for {file_kind!r}, not {kind!r}")
    params.update({k: v for k, v in args.items() if v is not None})
    return ExperimentConfig(kind, params)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = config_from_args(argv)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
