"""Command-line front end.

Every verb maps to one library operation and prints a single JSON document
on standard output.  Exit codes: 0 success, 1 input error, 2 violated
structural assumption, 3 arithmetic overflow, 4 oracle degeneracy.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import ams, oracle, regularity, surface
from .errors import (
    AmsregError,
    ArithmeticOverflowError,
    AssumptionViolationError,
    InputError,
    OracleDegeneracyError,
)
from .proximity import ProximityGraph, unload


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); keep 2 for assertions
        raise InputError(message)


def parse_multiplicities(text: str) -> list[int]:
    """Expand the compact syntax, e.g. '4000,1000x19'."""
    out: list[int] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            raise InputError("empty entry in multiplicity list")
        if "x" in token:
            value, _, count = token.partition("x")
            try:
                out.extend([int(value)] * int(count))
            except ValueError as exc:
                raise InputError(f"bad repetition token {token!r}") from exc
        else:
            try:
                out.append(int(token))
            except ValueError as exc:
                raise InputError(f"bad multiplicity {token!r}") from exc
    return out


def _read_m(args) -> list[int]:
    if getattr(args, "m_file", None):
        try:
            with open(args.m_file) as fh:
                data = json.load(fh)
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read multiplicity file: {exc}") from exc
        if not isinstance(data, list):
            raise InputError("the multiplicity file must hold a JSON array")
        return [int(x) for x in data]
    if getattr(args, "m", None) is None:
        raise InputError("missing multiplicities: pass --m or --m-file")
    return parse_multiplicities(args.m)


def _read_delta(args) -> ams.DeltaSequence:
    return ams.validate_delta_sequence(parse_multiplicities(args.delta))


def _graph_from(args) -> ProximityGraph:
    if getattr(args, "graph_json", None):
        return ProximityGraph.from_json(args.graph_json)
    if getattr(args, "recipe", None):
        return ams.build_graph(ams.GraphRecipe.parse(args.recipe))
    raise InputError("missing graph: pass --recipe or --graph-json")


def _note(args, text: str) -> None:
    if args.verbose:
        print(text, file=sys.stderr)


def _cmd_graph(args) -> str:
    graph = ams.build_graph(ams.GraphRecipe.parse(args.recipe))
    _note(args, f"{args.recipe}: {graph.n_points} vertices, "
                f"{len(graph.satellite_pairs())} satellites")
    return graph.to_json()


def _cmd_delta(args) -> str:
    if args.delta_action == "validate":
        try:
            seq = _read_delta(args)
        except InputError as exc:
            violations = getattr(exc, "violations", None)
            if violations is None:
                raise
            return json.dumps({"valid": False, "violations": violations})
        return json.dumps(
            {"valid": True, "violations": [], "d": list(seq.d), "nq": list(seq.nq)}
        )
    seq = _read_delta(args)
    if args.delta_action == "newton":
        data = ams.newton_polygons(seq)
        return json.dumps({"g": data.g, "pairs": [list(p) for p in data.pairs]})
    graph = ams.delta_to_proximity(seq, args.points)
    _note(args, f"minimal resolution with {graph.n_points} vertices")
    return graph.to_json()


def _cmd_unload(args) -> str:
    graph = _graph_from(args)
    fixed, trace = unload(graph, _read_m(args))
    obj = {
        "m": list(fixed),
        "all_tame": trace.all_tame,
        "total_steps": trace.total_steps,
    }
    if args.trace:
        obj["steps"] = [
            [st.vertex, st.excess, st.delta, st.count] for st in trace.steps
        ]
    return json.dumps(obj)


def _cmd_dim(args) -> str:
    graph = _graph_from(args)
    model = surface.SurfaceModel(graph)
    m = _read_m(args)
    cls = surface.DivisorClass.from_system(args.d, m, graph.n_points)
    v_h0 = surface.h0(cls, model)
    v_h1 = surface.h1(cls, model)
    _note(args, f"degree {args.d}: dim {v_h0 - 1}, h1 {v_h1}")
    return json.dumps(
        {"d": args.d, "m": m, "dim": v_h0 - 1, "h0": v_h0, "h1": v_h1}
    )


def _cmd_beta(args) -> str:
    report = regularity.beta_bound(
        _read_m(args), ams.GraphRecipe.parse(args.recipe), keep_trace=args.trace
    )
    _note(args, f"beta = {report.beta} (j = {report.j_found}, "
                f"{report.stage_count} stages, {report.wall_time:.2f}s)")
    return report.to_json()


def _cmd_best_beta(args) -> str:
    report, recipe = regularity.best_beta(_read_m(args), jobs=args.jobs)
    _note(args, f"best beta = {report.beta} at {recipe}")
    return report.to_json()


def _cmd_tau(args) -> str:
    m = _read_m(args)
    recipe = ams.GraphRecipe.parse(args.recipe)
    verdict = regularity.exact_regularity(m, recipe)
    if verdict.kind == "inapplicable":
        verdict = regularity.regularity_bracket(m, recipe)
    _note(args, f"verdict {verdict.kind}: tau {verdict.tau}, "
                f"bracket [{verdict.lower}, {verdict.upper}]")
    return verdict.to_json()


def _cmd_nonspecial(args) -> str:
    verdict = regularity.nonspeciality_check(
        args.d, _read_m(args), ams.GraphRecipe.parse(args.recipe)
    )
    return verdict.to_json()


def _cmd_family(args) -> str:
    recipe = ams.GraphRecipe.parse(args.recipe)
    system = regularity.conjecture_family(recipe, args.n)
    return json.dumps(
        {
            "recipe": str(recipe.with_decoration("plus")),
            "n": args.n,
            "inequalities": [q.to_obj() for q in system],
        }
    )


def _cmd_oracle(args) -> str:
    seed = args.seed if args.seed is not None else oracle.default_seed()
    m = _read_m(args)
    if args.oracle_action == "dim":
        sample = oracle.PointSample.generate(len(m), seed)
        dim, h1 = oracle.dim_linear_system(args.d, m, sample)
        return json.dumps({"d": args.d, "m": m, "dim": dim, "h1": h1, "seed": seed})
    tau = oracle.tau_oracle(m, seed)
    return json.dumps({"m": m, "tau": tau, "seed": seed})


def _build_parser() -> _Parser:
    parser = _Parser(prog="amsreg", description=__doc__)
    parser.add_argument("--verbose", action="store_true",
                        help="human-readable summary on standard error")
    sub = parser.add_subparsers(dest="verb", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        return p

    p = add("graph", _cmd_graph, help="build a recipe graph")
    graph_sub = p.add_subparsers(dest="graph_action", required=True)
    pb = graph_sub.add_parser("build")
    pb.set_defaults(fn=_cmd_graph)
    pb.add_argument("--recipe", required=True)

    p = add("delta", _cmd_delta, help="delta-sequence tools")
    delta_sub = p.add_subparsers(dest="delta_action", required=True)
    for action in ("validate", "graph", "newton"):
        pa = delta_sub.add_parser(action)
        pa.set_defaults(fn=_cmd_delta)
        pa.add_argument("--delta", required=True)
        if action == "graph":
            pa.add_argument("--points", type=int, default=None)

    def add_m(p, with_file=True):
        p.add_argument("--m")
        if with_file:
            p.add_argument("--m-file")

    p = add("unload", _cmd_unload, help="unload to the consistent fixed point")
    add_m(p)
    p.add_argument("--recipe")
    p.add_argument("--graph-json")
    p.add_argument("--trace", action="store_true")

    p = add("dim", _cmd_dim, help="dimension of a complete linear system")
    p.add_argument("--d", type=int, required=True)
    add_m(p)
    p.add_argument("--recipe")
    p.add_argument("--graph-json")

    p = add("beta", _cmd_beta, help="staged upper bound for the regularity")
    add_m(p)
    p.add_argument("--recipe", required=True)
    p.add_argument("--trace", action="store_true")

    p = add("best-beta", _cmd_best_beta, help="minimum beta over representatives")
    add_m(p)
    p.add_argument("--jobs", type=int, default=None)

    p = add("tau", _cmd_tau, help="exact regularity or bracket")
    add_m(p)
    p.add_argument("--recipe", required=True)

    p = add("nonspecial", _cmd_nonspecial, help="non-speciality certificate")
    p.add_argument("--d", type=int, required=True)
    add_m(p)
    p.add_argument("--recipe", required=True)

    p = add("family", _cmd_family, help="inequality system of a certified family")
    p.add_argument("--recipe", required=True)
    p.add_argument("--n", type=int, required=True)

    p = add("oracle", _cmd_oracle, help="ground truth at random generic points")
    oracle_sub = p.add_subparsers(dest="oracle_action", required=True)
    for action in ("dim", "tau"):
        pa = oracle_sub.add_parser(action)
        pa.set_defaults(fn=_cmd_oracle)
        add_m(pa)
        pa.add_argument("--seed", type=int, default=None)
        if action == "dim":
            pa.add_argument("--d", type=int, required=True)

    return parser


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        print(args.fn(args))
        return 0
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except AssumptionViolationError as exc:
        print(f"assumption violated: {exc}", file=sys.stderr)
        return 2
    except ArithmeticOverflowError as exc:
        print(f"overflow: {exc}", file=sys.stderr)
        return 3
    except OracleDegeneracyError as exc:
        print(f"oracle degeneracy (seed {exc.seed}): {exc}", file=sys.stderr)
        return 4
    except AmsregError as exc:  # internal invariant failures
        print(f"invariant failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
