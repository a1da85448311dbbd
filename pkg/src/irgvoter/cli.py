"""Command-line front end: ``python3 -m irgvoter <command> ...``.

Commands: gen, stats, exact, simulate, scaling, audit, gw, probe, validate.

Every artifact embeds the run configuration and the package version and
contains no timestamps, so identical configurations give identical bytes.
Files are written atomically (temp file + rename) into ``--out`` or, when
that is a bare name, into ``$IRGVOTER_OUTPUT_DIR`` (default: the working
directory).

Exit codes: 0 success, 2 invalid parameters, 3 exact-solve cap exceeded,
4 horizon censoring beyond ``--max-censored`` (partial results written).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .chains import (CAPS, CapExceeded, bound_audit, build_generator, chain_quantities, hitting_times,
                     stationary)
from .dynamics import CoalConfig, VoterConfig, batch
from .experiments import (component_probe, config_violations, model_agreement_probe, parse_grid,
                          scaling_experiment)
from .graphgen import GraphSpec, collapse, format_graph, read_graph, sample_graph
from .gwcoupling import LimitWeight, gw_tail_statistics, sample_tree
from .rng import RngStream
from .structure import components, structure_report

EXIT_OK, EXIT_INVALID, EXIT_CAP, EXIT_CENSORED = 0, 2, 3, 4
OUTPUT_ENV = "IRGVOTER_OUTPUT_DIR"


class Censored(RuntimeError):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"command": self.command, "params": self.params, "version": __version__}


# -- output ----------------------------------------------------------------------

def _resolve(path: str | None, default: str) -> Path:
    p = Path(path or default)
    if not p.is_absolute() and p.parent == Path("."):
        p = Path(os.environ.get(OUTPUT_ENV, ".")) / p
    return p


def atomic_write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _clean(x):
    """JSON-safe copy: numpy scalars/arrays to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, np.generic):
        return _clean(x.item())
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def dump_json(cfg: RunConfig, result) -> str:
    doc = {"config": cfg.to_dict(), "result": result}
    return json.dumps(_clean(doc), indent=1, sort_keys=True) + "\n"


def _csv_with_config(cfg: RunConfig, body: str) -> str:
    return "# " + json.dumps(_clean(cfg.to_dict()), sort_keys=True) + "\n" + body


def _emit(args, cfg: RunConfig, result, default_stem: str, csv_body: str | None = None) -> list:
    written = []
    stem = args.out or default_stem
    if args.format == "csv" and csv_body is not None:
        written.append(atomic_write(_resolve(_with_suffix(stem, ".csv"), default_stem), _csv_with_config(cfg, csv_body)))
    else:
        written.append(atomic_write(_resolve(_with_suffix(stem, ".json"), default_stem), dump_json(cfg, result)))
    return written


def _with_suffix(stem: str, suffix: str) -> str:
    return stem if stem.endswith(suffix) else stem + suffix


# -- argument groups ------------------------------------------------------------------

def _graph_args(p, required=False):
    p.add_argument("--graph", help="graph file (header `N beta gamma variant`)")
    p.add_argument("--n", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--variant", default="cl")
    p.add_argument("--allow-nonsubcritical", action="store_true")


def _dyn_args(p):
    p.add_argument("--dynamics", default="classical", choices=["classical", "discursive"])
    p.add_argument("--theta", type=float, default=0.0)


def _common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file or stem")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--threads", type=int, default=1,
                   help="worker count; results never depend on it")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="irgvoter", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="sample a graph")
    _graph_args(p)
    _common(p)

    p = sub.add_parser("stats", help="component structure report")
    _graph_args(p)
    _common(p)
    p.add_argument("--min-size", type=int, default=1)

    p = sub.add_parser("exact", help="exact chain quantities on one component")
    _graph_args(p)
    _dyn_args(p)
    _common(p)
    p.add_argument("--component", type=int, default=1, help="any vertex of the component")

    p = sub.add_parser("audit", help="inequality audit on one component")
    _graph_args(p)
    _dyn_args(p)
    _common(p)
    p.add_argument("--component", type=int, default=1)

    p = sub.add_parser("simulate", help="Monte Carlo batch on one graph")
    _graph_args(p)
    _dyn_args(p)
    _common(p)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--init", choices=["bernoulli", "unique"], default="bernoulli")
    p.add_argument("--u", type=float, default=0.5)
    p.add_argument("--coalescing", choices=["all", "stationary_pair"], default=None)
    p.add_argument("--mode", choices=["naive", "active", "reference"], default="naive")
    p.add_argument("--horizon", type=float)
    p.add_argument("--max-censored", type=int, default=0)

    p = sub.add_parser("scaling", help="fit the consensus-time exponent over a grid of N")
    _graph_args(p)
    _dyn_args(p)
    _common(p)
    p.add_argument("--grid", required=True, help="lo:hi:xK or a comma list")
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--init", choices=["bernoulli", "unique"], default="bernoulli")
    p.add_argument("--u", type=float, default=0.5)
    p.add_argument("--tolerance", type=float, default=0.15)
    p.add_argument("--target", type=float)
    p.add_argument("--quenched", action="store_true")
    p.add_argument("--mode", choices=["naive", "active"], default="naive")
    p.add_argument("--horizon", type=float)
    p.add_argument("--max-censored", type=int, default=0)
    p.add_argument("--n-boot", type=int, default=1000)

    p = sub.add_parser("gw", help="Galton-Watson tail statistics or one marked tree")
    _graph_args(p)
    _common(p)
    p.add_argument("--alpha", type=float, default=1.01)
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--tree", type=int, help="print the marked tree rooted at this vertex instead")

    p = sub.add_parser("probe", help="component-1 vs double-star timing, or variant agreement")
    _graph_args(p)
    _dyn_args(p)
    _common(p)
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--agreement", action="store_true")

    p = sub.add_parser("validate", help="report violated preconditions without running")
    _graph_args(p)
    _dyn_args(p)
    _common(p)
    p.add_argument("--grid")
    p.add_argument("--reps", type=int)
    return ap


def _params(args) -> dict:
    skip = {"out", "format", "threads", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _spec(args) -> GraphSpec:
    missing = [k for k in ("n", "beta", "gamma") if getattr(args, k) is None]
    if missing:
        raise ValueError("missing " + ", ".join("--" + m for m in missing) + " (or pass --graph)")
    return GraphSpec(args.n, args.beta, args.gamma, args.variant, args.allow_nonsubcritical)


def _graph(args):
    if args.graph:
        return read_graph(args.graph)
    return sample_graph(_spec(args), RngStream(args.seed, "graph"))


def _simple(g):
    return collapse(g) if not g.is_simple else g


# -- commands ----------------------------------------------------------------------------

def cmd_gen(args, cfg):
    spec = _spec(args)
    g = sample_graph(spec, RngStream(args.seed, "graph"))
    text = format_graph(g, spec)
    head, _, body = text.partition("\n")
    text = head + "\n# " + json.dumps(_clean(cfg.to_dict()), sort_keys=True) + "\n" + body
    return [atomic_write(_resolve(args.out, f"graph_{spec.n}_{spec.variant}_{args.seed}.txt"), text)]


def cmd_stats(args, cfg):
    g = _graph(args)
    rep = structure_report(g, gamma=g.meta.get("gamma", args.gamma), min_size=args.min_size)
    return _emit(args, cfg, rep.to_dict(), "stats", rep.components_csv())


def _component(g, v):
    return components(g).of(v)


def cmd_exact(args, cfg):
    g = _simple(_graph(args))
    rm = build_generator(g, _component(g, args.component), args.dynamics, args.theta)
    q = chain_quantities(rm)
    hit = hitting_times(rm)
    res = q.to_dict()
    res.update(states=rm.states, pi=stationary(rm), t_hit_worst_pair=list(hit.worst_pair),
               hitting_matrix=hit.matrix, caps=CAPS)
    return _emit(args, cfg, res, "exact")


def cmd_audit(args, cfg):
    g = _simple(_graph(args))
    rm = build_generator(g, _component(g, args.component), args.dynamics, args.theta)
    rep = bound_audit(rm)
    return _emit(args, cfg, rep.to_dict(), "audit")


def cmd_simulate(args, cfg):
    g = _simple(_graph(args))
    if args.coalescing:
        c = CoalConfig(args.dynamics, args.theta, args.coalescing, horizon=args.horizon)
    else:
        c = VoterConfig(args.dynamics, args.theta, args.init, args.u, args.horizon, args.mode)
    st = batch(g, c, args.reps, RngStream(args.seed, "simulate"))
    out = _emit(args, cfg, st.record(), "simulate")
    if st.n_censored > args.max_censored:
        raise Censored(f"{st.n_censored} replicates censored at the horizon")
    return out


def cmd_scaling(args, cfg):
    if args.gamma is None or args.beta is None:
        raise ValueError("scaling needs --gamma and --beta")
    grid = parse_grid(args.grid)
    template = GraphSpec(grid[0], args.beta, args.gamma, args.variant, args.allow_nonsubcritical)
    res = scaling_experiment(template, args.dynamics, args.theta, grid, args.reps,
                             RngStream(args.seed, "scaling"), init=args.init, u=args.u,
                             tolerance=args.tolerance, target=args.target, quenched=args.quenched,
                             horizon=args.horizon, mode=args.mode, n_boot=args.n_boot)
    stem = args.out or "scaling"
    for sfx in (".json", ".csv"):
        stem = stem[:-len(sfx)] if stem.endswith(sfx) else stem
    written = [atomic_write(_resolve(stem + ".csv", "scaling.csv"), _csv_with_config(cfg, res.to_csv())),
               atomic_write(_resolve(stem + ".json", "scaling.json"), dump_json(cfg, res.summary()))]
    if res.n_censored > args.max_censored:
        raise Censored(f"{res.n_censored} replicates censored at the horizon")
    return written


def cmd_gw(args, cfg):
    if args.gamma is None or args.beta is None:
        raise ValueError("gw needs --gamma and --beta")
    if args.tree is not None:
        spec = _spec(args)
        t = sample_tree(args.tree, spec, RngStream(args.seed, "gw").generator())
        text = "# " + json.dumps(_clean(cfg.to_dict()), sort_keys=True) + "\n" + t.to_text()
        return [atomic_write(_resolve(args.out, "tree.txt"), text)]
    rep = gw_tail_statistics(LimitWeight(args.beta, args.gamma), args.alpha, args.samples,
                             RngStream(args.seed, "gw"))
    return _emit(args, cfg, rep.to_dict(), "gw")


def cmd_probe(args, cfg):
    if args.agreement:
        spec = _spec(args)
        rep = model_agreement_probe(spec.n, spec.beta, spec.gamma, RngStream(args.seed, "agreement"),
                                    reps=args.reps)
        return _emit(args, cfg, rep.to_dict(), "probe")
    g = _simple(_graph(args))
    rep = component_probe(g, args.dynamics, args.theta, RngStream(args.seed, "probe"), reps=args.reps)
    return _emit(args, cfg, rep.to_dict(), "probe")


def cmd_validate(args, cfg):
    diags = config_violations(args.n, args.beta, args.gamma, args.variant, args.allow_nonsubcritical,
                              args.theta, args.dynamics, args.grid, args.reps)
    print(json.dumps({"diagnostics": diags}, indent=1))
    return diags


COMMANDS = {"gen": cmd_gen, "stats": cmd_stats, "exact": cmd_exact, "audit": cmd_audit,
            "simulate": cmd_simulate, "scaling": cmd_scaling, "gw": cmd_gw, "probe": cmd_probe,
            "validate": cmd_validate}


def _error(kind: str, msg: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": msg, "exit": code}), file=sys.stderr)
    return code


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(args.command, _params(args))
    try:
        out = COMMANDS[args.command](args, cfg)
    except CapExceeded as e:
        return _error("cap_exceeded", str(e), EXIT_CAP)
    except Censored as e:
        return _error("censored", str(e), EXIT_CENSORED)
    except (ValueError, KeyError, FileNotFoundError) as e:
        return _error("invalid_parameters", str(e), EXIT_INVALID)
    if args.command == "validate":
        return EXIT_INVALID if out else EXIT_OK
    for p in out:
        print(p)
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
