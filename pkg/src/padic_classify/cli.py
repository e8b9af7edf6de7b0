"""Command-line front end.

Exit codes: 0 success, 1 trivial or infeasible result, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import fixtures
from .centers import center_candidates, epsilon_energy
from .clustering import DEFAULT_FAMILY_CAP, split_lbg
from .dendrogram import (
    Dendrogram, DendrogramError, ExtendedDendrogram, build, format_tree,
    parse_tree, to_dot,
)
from .energy import EnergyValue, vertex_energy
from .learning import Classification, LearningError, adaptive_learn, learn, verify_classifier
from .padic import DigitWordError, FieldMismatchError, FieldParams, first_primes, format_value, is_prime, parse_value
from .pranking import asymptotic_ranking, minimal_stabilization_prime, ranking_table, stabilization_bound

EXIT_OK, EXIT_TRIVIAL, EXIT_INPUT = 0, 1, 2


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    field: FieldParams
    fmt: str | None
    family_cap: int


# -- input ------------------------------------------------------------------

def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def read_dataset(text: str, field: FieldParams, source: str = "<input>"):
    data = []
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line:
            continue
        try:
            x = parse_value(line, field)
        except DigitWordError as exc:
            raise InputError(f"{source}:{lineno}: {exc}") from None
        if x in seen:
            raise InputError(f"{source}:{lineno}: duplicate datum (same as line {seen[x]})")
        seen[x] = lineno
        data.append(x)
    if not data:
        raise InputError(f"{source}: no data")
    return data


def load_input(arg: str, field: FieldParams):
    """``("tree", AbstractDendrogram)`` or ``("data", [PAdicValue])``."""
    if arg.startswith("fixture:"):
        try:
            return "tree", fixtures.tree(arg[len("fixture:"):])
        except KeyError as exc:
            raise InputError(str(exc.args[0])) from None
    path = Path(arg)
    try:
        text = sys.stdin.read() if arg == "-" else path.read_text()
    except OSError as exc:
        raise InputError(f"{arg}: {exc.strerror}") from None
    body = "\n".join(_strip_comment(l) for l in text.splitlines()).strip()
    if body.startswith("("):
        try:
            return "tree", parse_tree(body)
        except DendrogramError as exc:
            raise InputError(f"{arg}: {exc}") from None
    return "data", read_dataset(text, field, arg)


def _dendrogram(kind, obj, field: FieldParams) -> Dendrogram:
    return obj.as_dendrogram(field) if kind == "tree" else build(obj)


def parse_threshold(text: str, field: FieldParams):
    """A rational like ``1/4`` or a power ``p^-j``."""
    m = re.fullmatch(r"\s*p\^\(?(-?\d+)\)?\s*", text)
    if m:
        return EnergyValue.term(field, -int(m.group(1)) * field.e)
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise InputError(f"bad threshold {text!r}; use a rational or p^-j") from None
    if value < 0:
        raise InputError("thresholds must be nonnegative")
    return value


def parse_primes(text: str) -> list[int] | str:
    if text == "auto":
        return text
    try:
        primes = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"bad prime list {text!r}") from None
    bad = [p for p in primes if not is_prime(p)]
    if bad or not primes:
        raise InputError(f"not primes: {bad or text!r}")
    return primes


# -- output helpers ---------------------------------------------------------

def emit(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _energy_json(value) -> dict:
    if isinstance(value, EnergyValue):
        return value.to_json()
    return {"exact": str(value), "decimal": float(value)}


def tree_json(D: Dendrogram, extended: bool = False) -> dict:
    out = {
        "field": {"p": D.field.p, "e": D.field.e, "f": D.field.f},
        "n": D.n,
        "tree": format_tree(D),
        "root": f"e{D.root.index}" if D.root.is_end else f"v{D.root.id}",
        "vertices": [
            {"id": v.id, "level": v.level, "members": list(v.members),
             "children": [f"e{c.index}" if c.is_end else f"v{c.id}" for c in v.children]}
            for v in D.vertices
        ],
    }
    if D.data is not None:
        out["data"] = [format_value(x) for x in D.data]
    if extended:
        out["infinity"] = {"above": out["root"]}
    return out


# -- commands ---------------------------------------------------------------

def cmd_tree(args, cfg: RunConfig) -> tuple[str, int]:
    kind, obj = load_input(args.input, cfg.field)
    D = _dendrogram(kind, obj, cfg.field)
    fmt = cfg.fmt or "dot"
    if fmt == "dot":
        return to_dot(ExtendedDendrogram(D) if args.extended else D), EXIT_OK
    if fmt == "text":
        return format_tree(D) + "\n", EXIT_OK
    return emit(tree_json(D, args.extended)), EXIT_OK


def cmd_cluster(args, cfg: RunConfig) -> tuple[str, int]:
    if args.max_clusters is None:
        raise InputError("--max-clusters is required")
    if args.max_clusters < 1:
        raise InputError("--max-clusters must be at least 1")
    kind, obj = load_input(args.input, cfg.field)
    D = _dendrogram(kind, obj, cfg.field)
    if D.n < 2:
        raise InputError("clustering needs at least two data points")
    eps = parse_threshold(args.epsilon, cfg.field) if args.epsilon is not None else None
    if eps is not None and not isinstance(eps, EnergyValue) and eps == 0:
        raise InputError("--epsilon must be positive")
    results, fam = split_lbg(D, args.max_clusters, eps, cfg.family_cap)

    def clustering_json(res, member):
        remnants = {n.members for n in member.remnants}
        nodes = sorted(member.nodes + member.remnants, key=lambda n: n.members[0])
        return [{
            "members": list(node.members),
            "center_candidates": sorted(cen.candidates),
            "representative": cen.representative,
            "energy": _energy_json(vertex_energy(node)),
            "quasi_singleton": node.members in remnants,
        } for node, cen in zip(nodes, res.centers)]

    out = {
        "clusters": clustering_json(results[0], fam.members[0]),
        "total_energy": _energy_json(fam.energy),
        "quasi_singletons": [list(r) for r in results[0].remnants],
        "diagnostics": fam.diagnostics,
        "trivial": fam.trivial,
        "k": args.max_clusters,
        "log": [{**{k: v for k, v in entry.items() if k != "energy"},
                 "energy": _energy_json(entry["energy"])} for entry in fam.log],
    }
    if len(results) > 1:
        out["alternatives"] = [clustering_json(r, m) for r, m in zip(results[1:], fam.members[1:])]
    code = EXIT_TRIVIAL if fam.trivial else EXIT_OK
    if (cfg.fmt or "json") == "text":
        lines = [f"cluster {i}: {c['members']} center {c['representative']}"
                 for i, c in enumerate(out["clusters"])]
        lines.append(f"total energy: {fam.energy.exact_str()}")
        lines += [f"note: {d}" for d in fam.diagnostics]
        return "\n".join(lines) + "\n", code
    return emit(out), code


def cmd_centers(args, cfg: RunConfig) -> tuple[str, int]:
    kind, obj = load_input(args.input, cfg.field)
    D = _dendrogram(kind, obj, cfg.field)
    if args.cluster:
        try:
            C = sorted({int(t) for t in args.cluster.split(",")})
        except ValueError:
            raise InputError(f"bad cluster {args.cluster!r}") from None
        unknown = [i for i in C if i not in D.labels]
        if unknown:
            raise InputError(f"unknown data indices {unknown}")
    else:
        C = sorted(D.labels)
    res = center_candidates(D, C)
    eps = {str(a): epsilon_energy(D, C, a).to_json() for a in C}
    out = {"cluster": C, "center_candidates": sorted(res.candidates),
           "representative": res.representative, "epsilon": eps}
    if (cfg.fmt or "json") == "text":
        return f"candidates: {sorted(res.candidates)}\nrepresentative: {res.representative}\n", EXIT_OK
    return emit(out), EXIT_OK


def cmd_rank(args, cfg: RunConfig) -> tuple[str, int]:
    kind, obj = load_input(args.input, cfg.field)
    T = obj if kind == "tree" else build(obj).to_abstract()
    e = cfg.field.e
    primes = parse_primes(args.primes)
    bound = stabilization_bound(T, e)
    if primes == "auto":
        primes = [p for p in range(2, bound + 1) if is_prime(p)] or [2]
    labels = reference = None
    if args.input == "fixture:thirteen":
        labels, reference = fixtures.THIRTEEN_LABELS, fixtures.THIRTEEN_PRINTED
    table = ranking_table(T, primes, e, labels, reference)
    asym = asymptotic_ranking(T)
    exact = minimal_stabilization_prime(T, e) if args.exact else None
    if (cfg.fmt or "text") == "json":
        out = table.to_json()
        out["asymptotic"] = asym.groups
        if exact is not None:
            out["minimal_stabilization_prime"] = exact
        return emit(out), EXIT_OK
    text = table.render()
    text += "asymptotic ranking: " + " > ".join(
        "{" + ",".join(table.name(v) for v in g) + "}" for g in asym.groups) + "\n"
    if exact is not None:
        text += f"rankings equal the asymptotic one from p = {exact} on\n"
    return text, EXIT_OK


def _load_training(path: str, field: FieldParams):
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: {exc.msg}") from None
    if not isinstance(raw, dict) or not {"data", "clusters", "centers"} <= raw.keys():
        raise InputError(f"{path}: expected an object with data, clusters and centers")
    try:
        data = [parse_value(str(x), field) for x in raw["data"]]
    except DigitWordError as exc:
        raise InputError(f"{path}: {exc}") from None
    CL = Classification(data, [set(c) for c in raw["clusters"]])
    return CL, list(raw["centers"])


def cmd_learn(args, cfg: RunConfig) -> tuple[str, int]:
    CL, centers = _load_training(args.training, cfg.field)
    text = Path(args.updates).read_text() if args.updates != "-" else sys.stdin.read()
    Y = read_dataset(text, cfg.field, args.updates) if _has_data(text) else []
    if args.threshold is None:
        LF = learn(CL, centers, Y)
    else:
        LF = adaptive_learn(CL, centers, Y, parse_threshold(args.threshold, cfg.field))
    check = verify_classifier(LF, LF.model)
    R = len(LF.clusters)

    def cid(pos):
        return "inf" if pos == R else pos

    out = {
        "data": [format_value(x) for x in LF.data],
        "clusters": [sorted(C) for C in LF.clusters],
        "centers": LF.centers,
        "residue": ["inf"],
        "phi": {str(k): cid(v) for k, v in (check.phi or {}).items()},
        "verified": check.ok,
        "saturated": check.saturated,
        "steps": [s.to_json() for s in LF.log],
    }
    if args.threshold is not None:
        out["model_clusters"] = [sorted(C) for C in LF.model.clusters]
    return emit(out), EXIT_OK if check.ok else EXIT_TRIVIAL


def _has_data(text: str) -> bool:
    return any(_strip_comment(l) for l in text.splitlines())


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prime", "-p", type=int, default=2)
    common.add_argument("--ramification", "-e", type=int, default=1)
    common.add_argument("--residue-degree", "-f", type=int, default=1)
    common.add_argument("--format", choices=["json", "dot", "text"])
    common.add_argument("--family-cap", type=int, default=DEFAULT_FAMILY_CAP)

    parser = argparse.ArgumentParser(prog="padic-lbg", description="p-adic split-LBG clustering")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("tree", parents=[common], help="dendrogram of a dataset or tree")
    t.add_argument("input")
    t.add_argument("--extended", action="store_true", help="include the point at infinity")
    t.set_defaults(run=cmd_tree)

    c = sub.add_parser("cluster", parents=[common], help="greedy (quasi-)verticial clustering")
    c.add_argument("input")
    c.add_argument("--max-clusters", "-k", type=int)
    c.add_argument("--epsilon")
    c.set_defaults(run=cmd_cluster)

    z = sub.add_parser("centers", parents=[common], help="center candidates of a cluster")
    z.add_argument("input")
    z.add_argument("--cluster", help="comma-separated data indices (default: all)")
    z.set_defaults(run=cmd_centers)

    r = sub.add_parser("rank", parents=[common], help="vertex rankings per prime")
    r.add_argument("input")
    r.add_argument("--primes", default=",".join(map(str, first_primes(25))))
    r.add_argument("--exact", action="store_true", help="also find the minimal stabilizing prime")
    r.set_defaults(run=cmd_rank)

    l = sub.add_parser("learn", parents=[common], help="classify new data")
    l.add_argument("training", help="JSON with data, clusters and centers")
    l.add_argument("updates", help="dataset file of new data, in order")
    l.add_argument("--threshold", help="split clusters whose energy exceeds this")
    l.set_defaults(run=cmd_learn)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        field = FieldParams(args.prime, args.ramification, args.residue_degree)
        if args.family_cap < 1:
            raise InputError("--family-cap must be at least 1")
        cfg = RunConfig(field, args.format, args.family_cap)
        text, code = args.run(args, cfg)
    except (InputError, DigitWordError, DendrogramError, FieldMismatchError, LearningError,
            ValueError, OSError) as exc:
        print(f"padic-lbg: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
