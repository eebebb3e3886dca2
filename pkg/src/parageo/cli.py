"""Batch front-end.

Exit codes: 0 on success, 2 when a contract check fails (a JSON violation
report is printed), 1 on usage errors.  Exact rationals are written as
"p/q" strings and reals as decimal strings next to a "precision" field, so
identical arguments always produce identical bytes.
"""

import argparse
import json
import random
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import mpmath

from . import construct, extension, minima, nsystem
from .contracts import ContractViolation, Violation
from .numberfield import FieldContext, finite_place, infinite_places, make_target, parse_padic, padic_image, parse_real
from .scalars import PrecisionError

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib


class UsageError(Exception):
    pass


class ContractFailure(Exception):
    def __init__(self, report):
        self.report = report
        super().__init__(report.get("error", "contract"))


@dataclass
class ExperimentConfig:
    command: str = ""
    action: str = ""
    precision: int = 256
    qmax: str = None
    grid_step: str = "1/4"
    budget_height: float = 60.0
    mode: str = "certificate"
    seed: int = 0
    out: str = None
    format: str = "json"
    extra: dict = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- encoding

def enc(x, digits=25):
    """JSON-safe, deterministic encoding of the numbers the modules return."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, Fraction):
        return nsystem.number_to_json(x)
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        return "inf" if x == float("inf") else repr(x)
    if isinstance(x, mpmath.mpf):
        return "inf" if mpmath.isinf(x) else mpmath.nstr(x, digits, strip_zeros=False)
    if isinstance(x, dict):
        return {str(k): enc(v, digits) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [enc(v, digits) for v in x]
    return str(x)


def dumps(obj):
    return json.dumps(enc(obj), indent=2, sort_keys=True) + "\n"


def emit_plotdata(qs, columns, header=None):
    """Whitespace separated columns (q first) readable by gnuplot."""
    lines = []
    if header:
        lines.append("# " + " ".join(header))
    for i, q in enumerate(qs):
        row = [q] + [col[i] for col in columns]
        lines.append(" ".join(_plain(v) for v in row))
    return "\n".join(lines) + "\n"


def _plain(v):
    if isinstance(v, Fraction):
        return repr(float(v)) if v.denominator != 1 else str(v.numerator)
    if isinstance(v, mpmath.mpf):
        return mpmath.nstr(v, 17, strip_zeros=False)
    return repr(float(v)) if isinstance(v, float) else str(v)


def system_plotdata(system, qs):
    vals = [system.evaluate(q) for q in qs]
    cols = [[v[j] for v in vals] for j in range(system.n)]
    return emit_plotdata(qs, cols, ["q"] + [f"P_{j + 1}" for j in range(system.n)])


def profile_plotdata(prof, dual=None):
    cols = [prof.column(j) for j in range(prof.N)]
    head = ["q"] + [f"L_{j + 1}" for j in range(prof.N)]
    if dual is not None:
        cols += [dual.column(j) for j in range(dual.N)]
        head += [f"Lstar_{j + 1}" for j in range(dual.N)]
    return emit_plotdata(prof.q_grid, cols, head)


def _write(text, cfg):
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- argument readers

def parse_field(text):
    t = (text or "rational").strip().lower()
    if t in ("rational", "q"):
        return FieldContext.rational()
    if t.startswith("d="):
        t = t[2:]
    try:
        return FieldContext.quadratic(int(t))
    except ValueError as exc:
        raise UsageError(f"bad --field {text!r}: {exc}") from None


def parse_place(K, text):
    t = (text or "inf").strip().lower()
    if t.startswith("inf"):
        idx = int(t.split(":")[1]) if ":" in t else 0
        places = infinite_places(K)
        if idx >= len(places):
            raise UsageError(f"place index {idx} out of range")
        return places[idx]
    p = int(t.split("=")[-1].split(":")[-1])
    return finite_place(K, p)


def build_target(args, prec):
    K = parse_field(args.field)
    place = parse_place(K, args.place)
    items = [s.strip() for s in args.xi.split(",") if s.strip()]
    if len(items) < 2:
        raise UsageError("--xi needs at least two coordinates")
    if place.archimedean:
        xi = [parse_real(s, prec) for s in items]
    elif K.D == 1:
        xi = [parse_padic(s, place.p, prec) for s in items]
    else:
        xi = [padic_image(K.parse_element(s), place, K, prec) for s in items]
    return make_target(K, place, xi, prec, args.xi)


def _grid(cfg, qmin=0):
    try:
        return minima.q_grid(Fraction(cfg.qmax or "12"), Fraction(cfg.grid_step), Fraction(qmin))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad grid: {exc}") from None


def _budget(cfg):
    return minima.EnumerationBudget(max_height_log=cfg.budget_height)


def _load_system(path):
    try:
        with open(path) as fh:
            return nsystem.system_from_json(json.load(fh))
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise UsageError(f"cannot read system from {path}: {exc}") from None


def _fail(violations, what):
    raise ContractFailure({"error": what, "violations": [v.as_dict() for v in violations]})


# ---------------------------------------------------------------- system

def cmd_system(cfg, args):
    if cfg.action == "gen":
        rng = random.Random(cfg.seed)
        if args.periodic:
            S = nsystem.random_periodic_system(rng, args.n)
        else:
            S = nsystem.random_system(rng, args.n, moves=args.moves)
        return _write(dumps(nsystem.system_to_json(S)), cfg)
    if args.input is None:
        raise UsageError("--in is required")
    S = _load_system(args.input)
    if cfg.action == "validate":
        base = S.base if isinstance(S, nsystem.DualSystem) else S
        V = nsystem.validate(base)
        if V:
            _fail(V, "n-system")
        return _write(dumps({"valid": True, "n": S.n}), cfg)
    if cfg.action == "eval":
        qs = _grid(cfg, S.q0)
        if cfg.format == "plot":
            return _write(system_plotdata(S, qs), cfg)
        if cfg.format == "csv":
            lines = [",".join(["q"] + [f"P_{j + 1}" for j in range(S.n)])]
            lines += [",".join(enc(x) for x in (q,) + tuple(S.evaluate(q))) for q in qs]
            return _write("\n".join(lines) + "\n", cfg)
        return _write(dumps({"q": qs, "values": [S.evaluate(q) for q in qs]}), cfg)
    if cfg.action == "dual":
        D = nsystem.dual(S)
        if cfg.format == "plot":
            return _write(system_plotdata(D, _grid(cfg, S.q0)), cfg)
        return _write(dumps(nsystem.system_to_json(D)), cfg)
    if cfg.action == "rigidify":
        R = nsystem.rigidify(S, Fraction(args.c), Fraction(args.horizon) if args.horizon else None)
        return _write(dumps(nsystem.system_to_json(R)), cfg)
    if cfg.action == "exponents":
        return _write(dumps(nsystem.exponents(S).as_dict()), cfg)
    raise UsageError(f"unknown action {cfg.action}")


# ---------------------------------------------------------------- profile

def cmd_profile(cfg, args):
    target = build_target(args, cfg.precision)
    qs = _grid(cfg)
    prof = minima.profile(target, qs, k=args.k, kind=args.kind, budget=_budget(cfg))
    dual = minima.profile(target, qs, kind="Lstar", budget=_budget(cfg)) if args.dual else None
    if cfg.format == "plot":
        return _write(profile_plotdata(prof, dual), cfg)
    if cfg.format == "csv":
        return _write(prof.to_csv(), cfg)
    out = {"target": args.xi, "kind": prof.kind, "k": prof.k, "precision": cfg.precision, "exact": prof.exact,
           "q": prof.q_grid, "values": prof.values, "witnesses": prof.witnesses_json(),
           "max_twist": prof.max_twist}
    if dual is not None:
        out["dual_values"] = dual.values
        out["duality_sum_sup"] = minima.duality_sum_check(prof, dual)
    return _write(dumps(out), cfg)


# ---------------------------------------------------------------- construct

def cmd_construct(cfg, args):
    S = _load_system(args.system)
    consts = construct.ConstructionConstants(S.n, C=args.C, heuristic=args.heuristic)
    syn = construct.synthesize_point(S, args.steps, consts, cfg.precision)
    q_max = float(Fraction(cfg.qmax)) if cfg.qmax else None
    rep = construct.verify(syn, q_max, mode=cfg.mode, step=float(Fraction(cfg.grid_step)), budget=_budget(cfg))
    rep.pop("rows", None)
    prof = rep.pop("profile", None)
    with mpmath.workprec(cfg.precision):
        digits = int(cfg.precision * 0.30103)
        out = {"report": rep, "precision": cfg.precision, "C": consts.C,
               "xi": syn.xi_strings(digits), "error_radius": syn.error_radius,
               "direction": list(syn.direction),
               "chain": [{"q": syn.chain.q_phys(i), "schedule": asdict(syn.chain.schedule[i]),
                          "basis": [list(v) for v in b]} for i, b in enumerate(syn.chain.bases)],
               "chain_violations": [v.as_dict() for v in syn.chain.violations]}
        if prof is not None:
            out["profile_values"] = prof.values
        text = dumps(out)
    if not rep.get("ok", True) and not args.heuristic:
        raise ContractFailure({"error": "construction certificate", "violations": rep.get("violations", []),
                               "report": enc(rep)})
    return _write(text, cfg)


# ---------------------------------------------------------------- extend

def _number(text):
    if text is None:
        return None
    if text.strip().lower() == "inf":
        return extension.INF
    return Fraction(text)


def cmd_extend(cfg, args):
    if cfg.action == "transfer":
        exps = {k: _number(v) for k, v in (("omega", args.omega), ("omega_hat", args.omega_hat),
                                            ("lam", args.lambda_), ("lam_hat", args.lambda_hat)) if v is not None}
        if not exps:
            raise UsageError("give at least one of --omega, --omega-hat, --lambda, --lambda-hat")
        out = extension.exponent_transfer(exps, args.d)
        if "omega_hat" in out and "lam_hat" in out and out["omega_hat"] != 2 * args.d - 1:
            out["jarnik_residual"] = extension.jarnik_extended_residual(out["omega_hat"], out["lam_hat"], args.d)
        return _write(dumps(out), cfg)
    target = build_target(args, cfg.precision)
    ext = extension.ScalarExtension(target.field, place_index=target.place.index)
    rep = extension.verify_bounded_differences(target, ext, _grid(cfg), _budget(cfg))
    out = rep.as_dict()
    out["precision"] = cfg.precision
    if not rep.stable:
        raise ContractFailure({"error": "extension stability", "violations": [
            Violation("horizon-stability", None, "second-half sup exceeds first-half sup + 0.5").as_dict()],
            "report": enc(out)})
    return _write(dumps(out), cfg)


# ---------------------------------------------------------------- check

def cmd_check(cfg, args):
    if cfg.action == "jarnik":
        if args.input:
            S = _load_system(args.input)
        else:
            S = nsystem.random_periodic_system(random.Random(cfg.seed), 3)
        if S.n != 3:
            raise UsageError("the Jarnik identity is stated for 3-systems")
        res = nsystem.jarnik_residual(nsystem.exponents(S))
        out = {"residual": res, "exact": isinstance(res, Fraction)}
        if res != 0:
            _fail([Violation("jarnik", None, f"residual {res}")], "jarnik")
        return _write(dumps(out), cfg)
    target = build_target(args, cfg.precision)
    qs = _grid(cfg)
    b = _budget(cfg)
    if cfg.action == "sumrule":
        pL = minima.profile(target, qs, budget=b)
        pS = minima.profile(target, qs, kind="Lstar", budget=b)
        out = {"sum_rule_sup": minima.sum_rule_sup(pL), "duality_sum_sup": minima.duality_sum_check(pL, pS),
               "exact": pL.exact and pS.exact}
    elif cfg.action == "burger":
        pL = minima.profile(target, qs, budget=b)
        pk = minima.profile(target, qs, k=args.k, budget=b)
        out = {"k": args.k, "burger_sup": minima.burger_comparability_check(pL, pk), "exact": pL.exact and pk.exact}
    elif cfg.action == "thunder":
        ext = extension.ScalarExtension(target.field, place_index=target.place.index)
        qvals = [Fraction(q) for q in args.q.split(",")]
        st = extension.thunder_stability(target, ext, [tuple(qvals[:i]) for i in range(1, len(qvals) + 1)], b)
        out = {"sups": st["sups"], "stable": st["stable"],
               "log_ratios": {str(q): r.log_ratios for q, r in st["reports"].items()}}
        if not st["stable"]:
            _fail([Violation("thunder-stability", None, "ratio sup grows with the horizon")], "thunder")
    else:
        raise UsageError(f"unknown action {cfg.action}")
    out["precision"] = cfg.precision
    return _write(dumps(out), cfg)


# ---------------------------------------------------------------- parser

def _common(p):
    p.add_argument("--precision", type=int, default=256)
    p.add_argument("--qmax", default=None)
    p.add_argument("--grid-step", default="1/4")
    p.add_argument("--budget-height", type=float, default=60.0)
    p.add_argument("--mode", choices=("certificate", "enumeration"), default="certificate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json", "plot"), default="json")
    p.add_argument("--config", default=None, help="TOML file whose keys override the defaults")


def _target_args(p):
    p.add_argument("--field", default="rational")
    p.add_argument("--place", default="inf")
    p.add_argument("--xi", required=True)


def build_parser():
    top = _Parser(prog="parageo", description="Parametric geometry of numbers toolkit")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("system").add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("validate", "eval", "dual", "rigidify", "exponents", "gen"):
        p = sp.add_parser(name)
        _common(p)
        p.add_argument("--in", dest="input", default=None)
        if name == "rigidify":
            p.add_argument("--c", default="1")
            p.add_argument("--horizon", default=None)
        if name == "gen":
            p.add_argument("--n", type=int, default=3)
            p.add_argument("--moves", type=int, default=12)
            p.add_argument("--periodic", action="store_true")

    pp = sub.add_parser("profile").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = pp.add_parser("compute")
    _common(p)
    _target_args(p)
    p.add_argument("--kind", choices=("L", "Lstar", "compound"), default="L")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--dual", action="store_true", help="also compute the L* profile")

    cp = sub.add_parser("construct").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = cp.add_parser("run")
    _common(p)
    p.add_argument("--system", required=True)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--C", type=float, default=None)
    p.add_argument("--heuristic", action="store_true")

    ep = sub.add_parser("extend").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = ep.add_parser("verify")
    _common(p)
    _target_args(p)
    p = ep.add_parser("transfer")
    _common(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--omega", default=None)
    p.add_argument("--omega-hat", default=None)
    p.add_argument("--lambda", dest="lambda_", default=None)
    p.add_argument("--lambda-hat", default=None)

    kp = sub.add_parser("check").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = kp.add_parser("jarnik")
    _common(p)
    p.add_argument("--in", dest="input", default=None)
    for name in ("sumrule", "burger", "thunder"):
        p = kp.add_parser(name)
        _common(p)
        _target_args(p)
        if name == "burger":
            p.add_argument("--k", type=int, default=2)
        if name == "thunder":
            p.add_argument("--q", default="0,2,4")
    return top


def _config(args):
    cfg = ExperimentConfig(command=args.command, action=args.action)
    overrides = {}
    if args.config:
        try:
            with open(args.config, "rb") as fh:
                overrides = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        overrides = overrides.get("experiment", overrides)
    for key in ("precision", "qmax", "grid_step", "budget_height", "mode", "seed", "out", "format"):
        value = getattr(args, key)
        parser_default = build_parser_defaults.get(key)
        if key in overrides and value == parser_default:
            value = overrides[key]
        if value is not None:
            setattr(cfg, key, value)
    for key, value in overrides.items():
        if hasattr(args, key) and key not in asdict(cfg):
            setattr(args, key, value)
    cfg.qmax = None if cfg.qmax is None else str(cfg.qmax)
    cfg.grid_step = str(cfg.grid_step)
    return cfg


build_parser_defaults = {"precision": 256, "qmax": None, "grid_step": "1/4", "budget_height": 60.0,
                         "mode": "certificate", "seed": 0, "out": None, "format": "json"}

HANDLERS = {"system": cmd_system, "profile": cmd_profile, "construct": cmd_construct,
            "extend": cmd_extend, "check": cmd_check}


def run(argv=None):
    try:
        args = build_parser().parse_args(argv)
        cfg = _config(args)
        with mpmath.workprec(cfg.precision):
            HANDLERS[cfg.command](cfg, args)
        return 0
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 1
    except ContractFailure as exc:
        sys.stdout.write(dumps(exc.report))
        return 2
    except ContractViolation as exc:
        sys.stdout.write(dumps(exc.report()))
        return 2
    except PrecisionError as exc:
        sys.stdout.write(dumps({"error": "precision", "violations": [
            Violation("precision", None, str(exc)).as_dict()]}))
        return 2
    except (ValueError, NotImplementedError) as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 1


def main():
    sys.exit(run())
