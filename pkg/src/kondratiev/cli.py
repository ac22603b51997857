"""Command line: exact decisions, numerical norms and verification suites.

Every command prints one JSON document on stdout.  The document carries the
resolved ``config``; saving it and passing it back with ``--config`` repeats
the run exactly.

Exit codes: 0 success (a verdict of Fails is still a success), 1 some
verification suite failed, 2 invalid parameters or usage, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from .calculus import (
    DomainKind,
    DomainSpec,
    SpaceParams,
    as_rational,
    embed_compact,
    embed_continuous,
    is_algebra,
    member_constant,
    member_rho_power,
    parse_kind,
    power_target,
    product_target,
)
from .errors import InvalidParams, NumericalFailure, SuiteUnknown
from .norms import PROFILE_ENV, QuadSpec, classify, extremal_norm, kondratiev_norm
from .testfuncs import parse_expr

EXIT_OK = 0
EXIT_SUITE_FAILED = 1
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

# error fields raised deep inside the library, mapped back to the flag that set them
_FIELD_FLAGS = {
    "kind": "--domain", "d": "--d", "l": "--l", "gamma": "--gamma", "edges": "--edges",
    "m": "--m", "a": "--a", "p": "--p", "q": "--p", "n": "--n", "b": "--b",
    "func": "--func", "x": "--func", "center": "--func", "lam": "--func", "r": "--func",
    "j_max": "--jmax", "target_rel_error": "--target-rel-error", PROFILE_ENV: "--profile",
    "seed": "--seed", "workers": "--workers",
}


class UsageError(InvalidParams):
    def __init__(self, flag: str, message: str) -> None:
        super().__init__(f"{flag}: {message}", field=flag)
        self.flag = flag


@dataclass
class CliConfig:
    """Everything a command needs, in a JSON-friendly form (rationals as "num/den")."""

    domain: dict | None = None
    src: dict | None = None
    tgt: dict | None = None
    space: dict | None = None
    u: dict | None = None
    v: dict | None = None
    n: int | None = None
    b: str | None = None
    func: str | None = None
    quad: dict | None = None
    suite: str | None = None
    csv: str | None = None
    seed: int = 0
    quick: bool = False
    workers: int = 1

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}

    @classmethod
    def from_dict(cls, data: dict) -> "CliConfig":
        if not isinstance(data, dict):
            raise UsageError("--config", "expected a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise UsageError("--config", f"unknown keys {unknown}")
        return cls(**data)

    @classmethod
    def load(cls, path: str) -> "CliConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError("--config", str(exc)) from exc
        return cls.from_dict(data)


# ---------------------------------------------------------------------------
# value parsing
# ---------------------------------------------------------------------------

def parse_angle(text: str) -> float:
    """``0.5``, ``3/4``, ``pi/4``, ``pi*2/3`` or ``2/3*pi`` (radians)."""
    t = str(text).replace(" ", "").lower()
    if "pi" not in t:
        return float(as_rational(t, "gamma"))
    head, _, tail = t.partition("pi")
    coef = Fraction(1)
    if head:
        coef *= as_rational(head.rstrip("*"), "gamma")
    if tail:
        if tail.startswith("/"):
            coef /= as_rational(tail[1:], "gamma")
        elif tail.startswith("*"):
            coef *= as_rational(tail[1:], "gamma")
        else:
            raise InvalidParams(f"cannot parse angle {text!r}", field="gamma")
    return float(coef) * math.pi


def parse_edges(text: str) -> list:
    """``"u,v;u,v;u,v"`` polygon vertices, or ``"a1,a2,..."`` polar angles."""
    t = str(text).strip()
    if ";" in t:
        return [[float(as_rational(c, "edges")) for c in part.split(",")] for part in t.split(";") if part.strip()]
    return [parse_angle(c) for c in t.split(",") if c.strip()]


def _flag(flag: str, fn, value):
    try:
        return fn(value)
    except InvalidParams as exc:
        raise UsageError(flag, str(exc)) from exc


def _space_text(flag: str, text: str) -> dict:
    return _flag(flag, SpaceParams.parse, text).to_dict()


# ---------------------------------------------------------------------------
# argument parser
# ---------------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="JSON config file; explicit flags override it")
    p.add_argument("--pretty", action="store_true", help="human-readable output instead of JSON")
    p.add_argument("--csv", help="also write the shell series (norms) or case table (verify) as CSV")
    p.add_argument("--seed", type=int, help="seed for sampled points and tuples")
    return p


def _domain_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--domain", help="model | smooth-cone | nonsmooth-cone | dihedral | polyhedral")
    p.add_argument("--d", help="ambient dimension")
    p.add_argument("--l", help="dimension of the singular plane (model, dihedral)")
    p.add_argument("--gamma", help="cone opening angle, e.g. pi/4 (default pi/4)")
    p.add_argument("--edges", help='polyhedral base polygon "u,v;u,v;..." or polar angles "0,pi/2,pi"')
    return p


def _quad_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--profile", help=f"fast | default | accurate (default from ${PROFILE_ENV})")
    p.add_argument("--jmax", help="deepest dyadic shell")
    p.add_argument("--target-rel-error", help="quadrature accuracy target")
    return p


def build_parser() -> argparse.ArgumentParser:
    common, dom, quad = _common(), _domain_flags(), _quad_flags()
    parser = argparse.ArgumentParser(prog="kondratiev", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    decide = sub.add_parser("decide", help="exact embedding, algebra and product decisions")
    dsub = decide.add_subparsers(dest="what", required=True)
    for name, text in (("embed", "continuous embedding"), ("compact", "compact embedding")):
        p = dsub.add_parser(name, parents=[common, dom], help=text)
        p.add_argument("--src", help="source space, e.g. m=2,a=1,p=2")
        p.add_argument("--tgt", help="target space, e.g. m=1,a=0,q=4")
    p = dsub.add_parser("algebra", parents=[common, dom], help="is the space closed under products")
    p.add_argument("--space", help="m=..,a=..,p=..")
    p = dsub.add_parser("product", parents=[common, dom], help="target spaces for u*v")
    p.add_argument("--u", help="space of the first factor")
    p.add_argument("--v", help="space of the second factor")
    p = dsub.add_parser("power", parents=[common, dom], help="target spaces for u**n")
    p.add_argument("--space", help="m=..,a=..,p=..")
    p.add_argument("--n", help="exponent (integer >= 1)")

    member = sub.add_parser("member", help="exact membership of model functions")
    msub = member.add_subparsers(dest="what", required=True)
    p = msub.add_parser("const", parents=[common, dom], help="the constant function 1")
    p.add_argument("--space", help="m=..,a=..,p=..")
    p = msub.add_parser("rho", parents=[common, dom], help="regularized distance to the power b")
    p.add_argument("--space", help="m=..,a=..,p=..")
    p.add_argument("--b", help="exponent")

    for name, text in (("norm", "weighted norm by dyadic shells"),
                       ("extremal-norm", "norm with only order-0 and order-m terms")):
        p = sub.add_parser(name, parents=[common, dom, quad], help=text)
        p.add_argument("--func", help='expression, e.g. "rho_pow(b=-0.4)*psi()"')
        p.add_argument("--space", help="m=..,a=..,p=.. (or use --m/--a/--p)")
        p.add_argument("--m", help="smoothness")
        p.add_argument("--a", help="weight exponent")
        p.add_argument("--p", help="integrability (number or inf)")

    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("suite", nargs="?", help="suite id or 'all'")
    p.add_argument("--quick", action="store_true", default=None, help="smaller families")
    p.add_argument("--workers", type=int, help="cases evaluated concurrently")
    return parser


# ---------------------------------------------------------------------------
# config resolution
# ---------------------------------------------------------------------------

def _resolve(args: argparse.Namespace) -> CliConfig:
    cfg = CliConfig.load(args.config) if args.config else CliConfig()
    get = lambda name: getattr(args, name, None)  # noqa: E731

    if any(get(k) is not None for k in ("domain", "d", "l", "gamma", "edges")):
        dd = dict(cfg.domain or {})
        if get("domain") is not None:
            dd["kind"] = _flag("--domain", parse_kind, args.domain).value
        if get("d") is not None:
            dd["d"] = _flag("--d", _int, args.d)
        if get("l") is not None:
            dd["l"] = _flag("--l", _int, args.l)
        if get("gamma") is not None:
            dd["gamma"] = _flag("--gamma", parse_angle, args.gamma)
        if get("edges") is not None:
            dd["edges"] = _flag("--edges", parse_edges, args.edges)
        cfg.domain = dd
    if cfg.domain is not None:
        kind = _flag("--domain", parse_kind, cfg.domain.get("kind", "model"))
        if kind in (DomainKind.SMOOTH_CONE, DomainKind.NONSMOOTH_CONE):
            cfg.domain.setdefault("gamma", math.pi / 4)
        if kind is DomainKind.POLYHEDRAL_CONE:
            cfg.domain.setdefault("d", 3)
        cfg.domain = _domain(cfg).to_dict()

    for name in ("src", "tgt", "u", "v"):
        if get(name) is not None:
            setattr(cfg, name, _space_text(f"--{name}", getattr(args, name)))
    if get("space") is not None:
        cfg.space = _space_text("--space", args.space)
    if any(get(k) is not None for k in ("m", "a", "p")):
        sd = dict(cfg.space or {})
        for k in ("m", "a", "p"):
            if get(k) is not None:
                if k == "p":
                    sd.pop("q", None)
                sd[k] = getattr(args, k)
        missing = [k for k in ("m", "a") if k not in sd] + ([] if "p" in sd or "q" in sd else ["p"])
        if missing:
            raise UsageError(f"--{missing[0]}", "missing (give --m, --a and --p, or --space)")
        try:
            cfg.space = SpaceParams.from_dict(sd).to_dict()
        except InvalidParams as exc:
            raise UsageError(_FIELD_FLAGS.get(exc.field or "", "--space"), str(exc)) from exc
    if get("n") is not None:
        cfg.n = _flag("--n", _int, args.n)
    if get("b") is not None:
        cfg.b = str(_flag("--b", lambda t: as_rational(t, "b"), args.b))
    if get("func") is not None:
        cfg.func = args.func
    if get("seed") is not None:
        cfg.seed = args.seed
    if get("csv") is not None:
        cfg.csv = args.csv
    if get("suite") is not None:
        cfg.suite = args.suite
    if get("quick"):
        cfg.quick = True
    if get("workers") is not None:
        cfg.workers = args.workers

    if args.command in ("norm", "extremal-norm"):
        if get("profile") is not None or cfg.quad is None:
            base = _flag("--profile", QuadSpec.profile, get("profile")).to_dict()
        else:
            base = _flag("--config", QuadSpec.from_dict, cfg.quad).to_dict()
        if get("jmax") is not None:
            base["j_max"] = _flag("--jmax", _int, args.jmax)
        if get("target_rel_error") is not None:
            base["target_rel_error"] = _flag("--target-rel-error", lambda t: float(as_rational(t, "target_rel_error")),
                                             args.target_rel_error)
        cfg.quad = _flag("--jmax" if get("jmax") is not None else "--profile", QuadSpec.from_dict, base).to_dict()
    return cfg


def _int(text) -> int:
    q = as_rational(text, "value")
    if q.denominator != 1:
        raise InvalidParams(f"expected an integer, got {text}")
    return int(q)


def _domain(cfg: CliConfig) -> DomainSpec:
    if cfg.domain is None:
        raise UsageError("--domain", "a domain is required")
    try:
        return DomainSpec.from_dict(cfg.domain)
    except InvalidParams as exc:
        raise UsageError(_FIELD_FLAGS.get(exc.field or "", "--domain"), str(exc)) from exc


def _need(cfg: CliConfig, name: str, flag: str) -> Any:
    val = getattr(cfg, name)
    if val is None:
        raise UsageError(flag, "is required")
    return val


def _sp(cfg: CliConfig, name: str) -> SpaceParams:
    return _flag(f"--{name}", SpaceParams.from_dict, _need(cfg, name, f"--{name}"))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _decide(args, cfg: CliConfig) -> tuple[dict, int]:
    dom = _domain(cfg)
    if args.what == "embed":
        return embed_continuous(_sp(cfg, "src"), _sp(cfg, "tgt"), dom).to_dict(), EXIT_OK
    if args.what == "compact":
        return embed_compact(_sp(cfg, "src"), _sp(cfg, "tgt"), dom).to_dict(), EXIT_OK
    if args.what == "algebra":
        return is_algebra(_sp(cfg, "space"), dom).to_dict(), EXIT_OK
    if args.what == "product":
        return product_target(_sp(cfg, "u"), _sp(cfg, "v"), dom).to_dict(), EXIT_OK
    n = _need(cfg, "n", "--n")
    return _flag("--n", lambda k: power_target(_sp(cfg, "space"), k, dom), n).to_dict(), EXIT_OK


def _member(args, cfg: CliConfig) -> tuple[dict, int]:
    dom = _domain(cfg)
    sp = _sp(cfg, "space")
    if args.what == "const":
        return _flag("--domain", lambda s: member_constant(s, dom), sp).to_dict(), EXIT_OK
    b = _need(cfg, "b", "--b")
    return member_rho_power(b, sp, dom).to_dict(), EXIT_OK


def _norm(args, cfg: CliConfig) -> tuple[dict, int]:
    dom = _domain(cfg)
    sp = _sp(cfg, "space")
    tf = _flag("--func", parse_expr, _need(cfg, "func", "--func"))
    quad = QuadSpec.from_dict(cfg.quad)
    fn = kondratiev_norm if args.command == "norm" else extremal_norm
    try:
        res = fn(tf, sp, dom, quad)
    except InvalidParams as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(_FIELD_FLAGS.get(exc.field or "", "--func"), str(exc)) from exc
    if cfg.csv:
        Path(cfg.csv).write_text(res.series.to_csv(), encoding="utf-8")
    doc = res.to_dict()
    doc.update(function=tf.expr(), membership=classify(res.series).value, space=sp.to_dict(),
               domain=dom.to_dict(), extremal=args.command == "extremal-norm")
    return doc, EXIT_OK


def _verify(args, cfg: CliConfig) -> tuple[dict, int]:
    from .verify import SUITES, run_suite

    suite = _need(cfg, "suite", "suite")
    ids = list(SUITES) if suite == "all" else [suite]
    if suite != "all" and suite not in SUITES:
        raise UsageError("suite", f"unknown suite {suite!r}; known: all, {', '.join(SUITES)}")
    run_cfg = {"seed": cfg.seed, "quick": bool(cfg.quick), "workers": cfg.workers}
    reports = [run_suite(s, run_cfg) for s in ids]
    if cfg.csv:
        parts = [r.to_csv() for r in reports]
        body = parts[0] + "".join(p.split("\n", 1)[1] for p in parts[1:])
        Path(cfg.csv).write_text(body, encoding="utf-8")
    ok = all(r.passed for r in reports)
    doc = {
        "pass": ok,
        "suites": [r.to_dict() for r in reports],
        "summary": {r.suite: r.summary for r in reports},
    }
    return doc, EXIT_OK if ok else EXIT_SUITE_FAILED


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _pretty(doc: Any, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(doc, dict):
        lines = []
        width = max((len(str(k)) for k in doc), default=0)
        for k in sorted(doc):
            v = doc[k]
            if isinstance(v, (dict, list)) and v and not _flat_list(v):
                lines.append(f"{pad}{k}:")
                lines.append(_pretty(v, indent + 1))
            else:
                lines.append(f"{pad}{str(k).ljust(width)}  {_scalar(v)}")
        return "\n".join(lines)
    if isinstance(doc, list):
        return "\n".join(
            (f"{pad}-\n" + _pretty(v, indent + 1)) if isinstance(v, (dict, list)) else f"{pad}- {_scalar(v)}"
            for v in doc
        )
    return f"{pad}{_scalar(doc)}"


def _flat_list(v: Any) -> bool:
    return isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v)


def _scalar(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    if isinstance(v, list):
        return "[" + ", ".join(_scalar(x) for x in v) + "]"
    return json.dumps(v) if isinstance(v, dict) else str(v)


def _emit(doc: dict, pretty: bool) -> None:
    print(_pretty(doc) if pretty else json.dumps(doc, indent=2, sort_keys=True))


_COMMANDS = {"decide": _decide, "member": _member, "norm": _norm, "extremal-norm": _norm, "verify": _verify}


_NEGATIVE_VALUE = re.compile(r"^-(\d+(\.\d*)?|\.\d+)(/\d+)?(\*?pi)?$")


def _join_negative_values(argv: Sequence[str]) -> list[str]:
    """Turn ``--b -3/10`` into ``--b=-3/10``; argparse only knows plain negative numbers."""
    out: list[str] = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEGATIVE_VALUE.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = _join_negative_values(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the usage message
        return EXIT_INVALID if exc.code else EXIT_OK
    pretty = bool(getattr(args, "pretty", False))
    try:
        cfg = _resolve(args)
        if cfg.csv and args.command in ("decide", "member"):
            raise UsageError("--csv", "only norm, extremal-norm and verify write CSV")
        doc, code = _COMMANDS[args.command](args, cfg)
        doc["config"] = cfg.to_dict()
        doc["command"] = " ".join(filter(None, [args.command, getattr(args, "what", None)]))
    except (InvalidParams, SuiteUnknown) as exc:
        flag = getattr(exc, "flag", None) or _FIELD_FLAGS.get(getattr(exc, "field", None) or "", None)
        msg = str(exc) if isinstance(exc, UsageError) or flag is None else f"{flag}: {exc}"
        print(f"kondratiev: error: {msg}", file=sys.stderr)
        _emit({"error": msg, "flag": flag, "exit_code": EXIT_INVALID}, pretty)
        return EXIT_INVALID
    except NumericalFailure as exc:
        print(f"kondratiev: numerical failure: {exc}", file=sys.stderr)
        _emit({"error": str(exc), "kind": type(exc).__name__, "exit_code": EXIT_NUMERICAL}, pretty)
        return EXIT_NUMERICAL
    _emit(doc, pretty)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
