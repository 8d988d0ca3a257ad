"""Command-line front end: ``jordanlab {compute,subgroups,cd-lattice,verify-paper,report}``.

Exit codes: 0 success, 1 usage or parse error, 2 cap or timeout (a partial
JSON document is still written), 3 bound-only result.

Every ``RunConfig`` field can be set from the environment with a ``JL_``
prefix (``JL_ORDER_CAP``, ``JL_ELEMENT_CAP``, ``JL_DEGREE_CAP``,
``JL_TIME_BUDGET``, ``JL_FORMAT``, ``JL_CATALOG``, ``JL_LEDGER``,
``JL_JOBS``).  Flags win over the environment, the environment over defaults.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass

from .dsl import CatalogError, DSLSyntaxError, catalog_actions, default_catalog, load_catalog, build, parse, read_expressions, to_text
from .errors import CapExceeded, JordanLabError
from .jordan import Bounds, cd_lattice, jordan_report
from .ledger import FIELDS, Engine, LedgerError, load_ledger, report_json, report_markdown, verify_paper
from .perm import DEGREE_CAP, ELEMENT_CAP
from .subgroups import ORDER_CAP, all_subgroups

FORMATS = ("text", "json", "csv", "md")
CSV_COLUMNS = ("label", "expr", "order", "degree", "nu", "abar", "J", "Jbar", "method", "timing")

EXIT_OK, EXIT_USAGE, EXIT_CAP, EXIT_BOUND = 0, 1, 2, 3


@dataclass
class RunConfig:
    order_cap: int = ORDER_CAP
    element_cap: int = ELEMENT_CAP
    degree_cap: int = DEGREE_CAP
    time_budget: float = 120.0
    format: str = "text"
    catalog: str | None = None
    ledger: str | None = None
    jobs: int = 1
    timing: bool = True

    def __post_init__(self):
        for name in ("order_cap", "element_cap", "degree_cap", "jobs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.time_budget <= 0:
            raise ValueError("time_budget must be positive")
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {', '.join(FORMATS)}")


_ENV = {"order_cap": int, "element_cap": int, "degree_cap": int, "time_budget": float,
        "format": str, "catalog": str, "ledger": str, "jobs": int}


def resolve_config(args: argparse.Namespace, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    kw = {}
    for name, conv in _ENV.items():
        flag = getattr(args, name, None)
        env = environ.get("JL_" + name.upper())
        if flag is not None:
            kw[name] = flag
        elif env:
            kw[name] = conv(env)
    kw["timing"] = not getattr(args, "no_timing", False)
    return RunConfig(**kw)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    fmt = common.add_mutually_exclusive_group()
    for f in ("json", "csv", "md"):
        fmt.add_argument(f"--{f}", dest="format", action="store_const", const=f)
    common.add_argument("--order-cap", type=int)
    common.add_argument("--element-cap", type=int)
    common.add_argument("--degree-cap", type=int)
    common.add_argument("--time-budget", type=float, help="seconds per task")
    common.add_argument("--jobs", type=int)
    common.add_argument("--catalog", metavar="PATH")
    common.add_argument("--ledger", metavar="PATH")
    common.add_argument("--no-timing", action="store_true", help="omit timing fields")

    p = _Parser(prog="jordanlab", description="Jordan constants of finite permutation groups.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (("compute", "J, Jbar, nu and abar of a group"),
                        ("subgroups", "subgroup lattice summary"),
                        ("cd-lattice", "Chermak-Delgado maximal-measure subgroups")):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("expr", help="catalog label or group expression")
    s = sub.add_parser("verify-paper", parents=[common], help="verify the case ledger and aggregate")
    s.add_argument("--field", choices=FIELDS, action="append")
    s = sub.add_parser("report", parents=[common], help="reports for catalog entries or an expression file")
    s.add_argument("labels", nargs="*", help="catalog labels (default: all)")
    s.add_argument("--input", metavar="FILE", help="DSL text file, one expression per line")
    return p


# -- helpers ---------------------------------------------------------------------

class _Context:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.entries = load_catalog(cfg.catalog) if cfg.catalog else default_catalog()
        self.by_label = {e.label: e for e in self.entries}
        self.actions = catalog_actions(self.entries)

    def resolve(self, text: str):
        """(label, expression text or None, group) for a catalog label or a DSL expression."""
        if text in self.by_label:
            e = self.by_label[text]
            G = e.group
            label, expr = e.label, e.expr
        else:
            ast = parse(text)
            G = build(ast, self.actions)
            label = expr = to_text(ast)
        if G.degree > self.cfg.degree_cap:
            raise CapExceeded(f"degree {G.degree} exceeds degree cap {self.cfg.degree_cap}")
        return label, expr, G


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False)


def _fmt_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, Bounds):
        return f"{v.lower}..{v.upper}"
    return str(v)


def _csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue().rstrip("\n")


def _report_row(rep, timing):
    return [rep.label, rep.expr or "", rep.order, rep.degree, _fmt_value(rep.nu), _fmt_value(rep.abar),
            _fmt_value(rep.J), _fmt_value(rep.Jbar), rep.method, f"{rep.timing:.4f}" if timing else ""]


def _md_table(header, rows) -> str:
    out = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    out += ["| " + " | ".join(str(c) for c in r) + " |" for r in rows]
    return "\n".join(out)


def _report_text(rep) -> str:
    lines = [f"{rep.label}: order {rep.order} on {rep.degree} points",
             f"  nu = {_fmt_value(rep.nu)}, abar = {_fmt_value(rep.abar)}",
             f"  J = {_fmt_value(rep.J)}, Jbar = {_fmt_value(rep.Jbar)}",
             f"  method: {rep.method}"]
    if rep.certificate is not None and rep.method == "socle-shortcut":
        lines.append(f"  minimal normal orders: {rep.certificate['minimal_normal_orders']}"
                     f" (abelian: {rep.certificate['minimal_normal_abelian']})")
    if rep.truncated:
        lines.append("  truncated: time budget ran out during lattice enumeration")
    return "\n".join(lines)


def _report_exit(rep) -> int:
    if rep.truncated or rep.nu is None:
        return EXIT_CAP
    return EXIT_OK if rep.exact else EXIT_BOUND


def _render_reports(reports, cfg: RunConfig) -> str:
    if cfg.format == "json":
        docs = [r.to_dict(cfg.timing) for r in reports]
        return _dump(docs[0] if len(docs) == 1 else docs)
    if cfg.format == "csv":
        return _csv([_report_row(r, cfg.timing) for r in reports], CSV_COLUMNS)
    if cfg.format == "md":
        return _md_table(CSV_COLUMNS, [_report_row(r, cfg.timing) for r in reports])
    return "\n".join(_report_text(r) for r in reports)


# -- commands -----------------------------------------------------------------------

def cmd_compute(args, cfg: RunConfig, out) -> int:
    ctx = _Context(cfg)
    label, expr, G = ctx.resolve(args.expr)
    rep = jordan_report(G, label, expr, cfg.order_cap, cfg.element_cap, cfg.time_budget)
    print(_render_reports([rep], cfg), file=out)
    return _report_exit(rep)


def _name(H, T) -> str:
    if H.order == 1:
        return "1"
    if H.is_abelian and int(T.element_orders()[H.elements].max()) == H.order:
        return f"C{H.order}"
    return f"order-{H.order}"


def cmd_subgroups(args, cfg: RunConfig, out) -> int:
    ctx = _Context(cfg)
    label, expr, G = ctx.resolve(args.expr)
    try:
        L = all_subgroups(G, cfg.order_cap)
    except CapExceeded as exc:
        print(_dump({"label": label, "order": G.order, "error": str(exc)}), file=out)
        return EXIT_CAP
    classes = []
    for cls in L.classes:
        r = L.records[cls[0]]
        classes.append({"order": r.order, "size": len(cls), "is_abelian": bool(r.is_abelian),
                        "is_normal": bool(r.is_normal), "name": _name(r, L.table),
                        "generators": [str(L.table.elements[g]) for g in r.gens]})
    counts = L.counts_by_order()
    if cfg.format == "json":
        print(_dump({"label": label, "order": G.order, "subgroup_count": len(L), "class_count": len(L.classes),
                     "counts_by_order": {str(k): v for k, v in sorted(counts.items())}, "classes": classes}), file=out)
    elif cfg.format in ("csv", "md"):
        cols = ("order", "size", "is_abelian", "is_normal", "name", "generators")
        rows = [[c["order"], c["size"], c["is_abelian"], c["is_normal"], c["name"], " ".join(c["generators"])]
                for c in classes]
        print(_csv(rows, cols) if cfg.format == "csv" else _md_table(cols, rows), file=out)
    else:
        print(f"{label}: {len(L)} subgroups in {len(L.classes)} classes", file=out)
        for k, v in sorted(counts.items()):
            print(f"  order {k}: {v}", file=out)
    return EXIT_OK


def cmd_cd_lattice(args, cfg: RunConfig, out) -> int:
    ctx = _Context(cfg)
    label, expr, G = ctx.resolve(args.expr)
    try:
        entries = cd_lattice(G, cfg.order_cap)
    except CapExceeded as exc:
        print(_dump({"label": label, "order": G.order, "error": str(exc)}), file=out)
        return EXIT_CAP
    L = all_subgroups(G, cfg.order_cap)
    members = []
    for e in entries:
        r = L.records[e.record]
        members.append({"record": e.record, "order": r.order, "name": _name(r, L.table),
                        "generators": [str(L.table.elements[g]) for g in r.gens]})
    measure = entries[0].measure
    if cfg.format == "json":
        print(_dump({"label": label, "order": G.order, "max_measure": measure, "members": members}), file=out)
    elif cfg.format in ("csv", "md"):
        cols = ("record", "order", "name", "generators")
        rows = [[m["record"], m["order"], m["name"], " ".join(m["generators"])] for m in members]
        print(_csv(rows, cols) if cfg.format == "csv" else _md_table(cols, rows), file=out)
    else:
        names = ", ".join(m["name"] for m in members)
        print(f"max measure {measure}, members: {{{names}}}", file=out)
    return EXIT_OK


def cmd_verify_paper(args, cfg: RunConfig, out) -> int:
    fields = tuple(args.field) if args.field else FIELDS
    rows = load_ledger(cfg.ledger)
    entries = load_catalog(cfg.catalog) if cfg.catalog else None
    engine = Engine(entries, cfg.order_cap, cfg.element_cap, cfg.time_budget)
    res = verify_paper(fields, engine, cfg.jobs, rows)
    if cfg.format == "json":
        print(_dump(report_json(res, cfg.timing)), file=out)
    elif cfg.format == "csv":
        cols = ("id", "field", "kind", "value", "jbar", "witness", "verdict", "method", "time", "quote")
        data = [[r.case.id, r.case.field, r.case.kind, r.case.value, r.case.jbar or "", r.case.witness or "",
                 r.verdict, r.method, f"{r.time:.4f}" if cfg.timing else "", r.case.quote] for r in res["_results"]]
        print(_csv(data, cols), file=out)
    else:
        if cfg.format == "md":
            print(report_markdown(res, cfg.timing), file=out)
        else:
            for r in res["_results"]:
                val = f"{r.case.value}" + (f"/{r.case.jbar}" if r.case.jbar is not None else "")
                print(f"{r.case.id:<18} {val:>8}  {r.verdict:<10} {r.method}", file=out)
        for msg in res["_errors"]:
            print(f"blocked: {msg}", file=out)
        for t in res["_theorems"]:
            mark = "" if t.matches else f"  (expected J = {t.expected_J}, Jbar = {t.expected_Jbar})"
            print(t.summary() + mark, file=out)
    return EXIT_OK if res["ok"] else EXIT_CAP if any(r.verdict == "unverified" for r in res["_results"]) else EXIT_USAGE


def cmd_report(args, cfg: RunConfig, out) -> int:
    ctx = _Context(cfg)
    if args.input:
        targets = read_expressions(args.input)
    else:
        targets = args.labels or [e.label for e in ctx.entries]
    reports = []
    for t in targets:
        label, expr, G = ctx.resolve(t)
        reports.append(jordan_report(G, label, expr, cfg.order_cap, cfg.element_cap, cfg.time_budget))
    if cfg.format == "json":
        print(_dump([r.to_dict(cfg.timing) for r in reports]), file=out)
    else:
        print(_render_reports(reports, cfg), file=out)
    return max((_report_exit(r) for r in reports), default=EXIT_OK)


COMMANDS = {"compute": cmd_compute, "subgroups": cmd_subgroups, "cd-lattice": cmd_cd_lattice,
            "verify-paper": cmd_verify_paper, "report": cmd_report}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ValueError as exc:
        print(f"jordanlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, cfg, out)
    except (DSLSyntaxError, CatalogError, LedgerError) as exc:
        print(f"jordanlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceeded as exc:
        print(_dump({"error": str(exc), "command": args.command}), file=out)
        return EXIT_CAP
    except (JordanLabError, OSError) as exc:
        print(f"jordanlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
