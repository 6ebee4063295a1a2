"""Command line entry point.

Subcommands: enumerate (exact lattice checks), sample (path CSV output),
density (closed-form tabulation), minorant (convex minorant extraction),
verify (the named experiment suite).  Exit codes: 0 on success or pass,
1 when a check or experiment fails, 2 on usage errors.

Outputs are byte-stable for a fixed argument list: floats render with 17
significant digits, JSON keys are sorted, and every report carries a
schema field.  When --seed is absent, the VERVAAT_SEED environment
variable is consulted before the built-in default.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import closed_forms as cf
from . import experiments, lattice, minorant, samplers
from .rng import RngStream

__all__ = ["main", "build_parser"]


def _render(v: float) -> str:
    return format(float(v), ".17g")


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      allow_nan=False) + "\n"


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)


def _resolve_seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("VERVAAT_SEED")
    if env is not None:
        return int(env)
    return experiments.DEFAULT_SEED


# ---------------------------------------------------------------------------
# enumerate

def _cmd_enumerate(args) -> int:
    pmf = lattice.z_pmf(args.n, args.a)
    out = {
        "schema": 1,
        "n": args.n,
        "a": args.a,
        "pmf": [{"l": int(l), "num": int(m.numerator), "den": int(m.denominator)}
                for l, m in pmf.items()],
        "bijection_ok": lattice.bijection_check(args.n, args.a),
        "uniform_helper_ok": lattice.helper_uniform_check(args.n, args.a),
        "factorization_ok": lattice.factorization_check(args.n, args.a),
    }
    _write(args.out, _dump_json(out))
    flags = (out["bijection_ok"], out["uniform_helper_ok"], out["factorization_ok"])
    return 0 if all(flags) else 1


# ---------------------------------------------------------------------------
# sample

def _cmd_sample(args) -> int:
    seed = _resolve_seed(args.seed)
    spec = samplers.SamplerSpec(args.process, args.lam, 1.0, args.grid)
    if args.marginals:
        t_list = [float(s) for s in args.marginals.split(",")]
        if any(not 0.0 <= t <= 1.0 for t in t_list):
            raise ValueError("marginal times must lie in [0, 1]")
        rows = [",".join(_render(t) for t in t_list)]
        for rep in range(args.reps):
            path = samplers.draw(spec, RngStream(seed, rep))
            rows.append(",".join(_render(path.value_at(t)) for t in t_list))
        _write(args.out, "\n".join(rows) + "\n")
        return 0
    # gnuplot-style blocks: one header, paths separated by blank lines
    blocks = []
    for rep in range(args.reps):
        path = samplers.draw(spec, RngStream(seed, rep))
        lines = [f"{_render(t)},{_render(v)}"
                 for t, v in zip(path.times, path.values)]
        blocks.append("\n".join(lines))
    _write(args.out, "t,value\n" + "\n\n".join(blocks) + "\n")
    return 0


# ---------------------------------------------------------------------------
# density

def _parse_params(pairs) -> dict:
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise ValueError(f"parameter {item!r} is not key=value")
        k, v = item.split("=", 1)
        out[k] = float(v)
    return out


def _density_table(family: str, lam: float, params: dict, grid: int):
    if family == "fz":
        return (0.0, 1.0), lambda x: cf.f_z(lam, x), lambda x: cf.F_z(lam, x)
    if family == "fzhat":
        return (0.0, 1.0), lambda x: cf.f_zhat(lam, x), lambda x: cf.F_zhat(lam, x)
    if family == "fa":
        return (0.0, 1.0), lambda x: cf.f_a(lam, x), lambda x: cf.F_a(lam, x)
    if family == "fz-conditioned":
        spec = cf.f_z_conditioned_spec(lam)
        return (0.0, 1.0), spec.pdf, spec.cdf
    if family == "meander-marginal":
        t = params.get("t", 0.5)
        spec = cf.DensitySpec("meander_marginal", {"t": t}, (0.0, 8.0),
                              lambda x: cf.meander_marginal(t, x))
        return (0.0, 8.0), spec.pdf, spec.cdf
    if family == "maxwell":
        sigma = params.get("sigma", 1.0)
        return ((0.0, 8.0 * sigma),
                lambda x: cf.maxwell_density(sigma, x),
                lambda x: cf.maxwell_cdf(sigma, x))
    if family == "rayleigh":
        return ((0.0, 8.0), cf.rayleigh_density,
                lambda x: 1.0 - np.exp(-0.5 * np.asarray(x, dtype=float) ** 2))
    if family == "arcsine":
        return ((0.0, 1.0), cf.arcsine_density,
                lambda x: (2.0 / np.pi) * np.arcsin(
                    np.sqrt(np.clip(np.asarray(x, dtype=float), 0.0, 1.0))))
    raise ValueError(f"unknown density family {family!r}")


def _cmd_density(args) -> int:
    params = _parse_params(args.params)
    support, pdf, cdf = _density_table(args.family, args.lam, params, args.grid)
    xs = np.linspace(support[0], support[1], args.grid)
    ds = np.asarray(pdf(xs), dtype=float)
    cs = np.asarray(cdf(xs), dtype=float)
    rows = ["x,density,cdf"]
    rows += [f"{_render(x)},{_render(d)},{_render(c)}"
             for x, d, c in zip(xs, ds, cs)]
    _write(args.out, "\n".join(rows) + "\n")
    return 0


# ---------------------------------------------------------------------------
# minorant

def _cmd_minorant(args) -> int:
    seed = _resolve_seed(args.seed)
    spec = samplers.SamplerSpec(args.process, args.lam, 1.0, args.grid)
    if args.reps == 1:
        path = samplers.draw(spec, RngStream(seed, 0))
        res = minorant.convex_minorant(path)
        h = 1.0 / args.grid
        out = {
            "schema": 1,
            "process": args.process,
            "lam": args.lam,
            "grid": args.grid,
            "seed": seed,
            "n_segments": res.n_segments,
            "slopes": [float(s) for s in res.slopes],
            "vertices": [[float(i * h), float(path.values[i])]
                         for i in res.vertex_indices],
        }
        _write(args.out, _dump_json(out))
        return 0
    counts = []
    for rep in range(args.reps):
        path = samplers.draw(spec, RngStream(seed, rep))
        counts.append(minorant.convex_minorant(path).n_segments)
    counts = np.asarray(counts)
    hist = {str(k): int((counts == k).sum()) for k in sorted(set(counts.tolist()))}
    out = {
        "schema": 1,
        "process": args.process,
        "lam": args.lam,
        "grid": args.grid,
        "seed": seed,
        "reps": args.reps,
        "mean_segments": float(counts.mean()),
        "histogram": hist,
    }
    _write(args.out, _dump_json(out))
    return 0


# ---------------------------------------------------------------------------
# verify

def _cmd_verify(args) -> int:
    seed = _resolve_seed(args.seed)
    names = list(experiments.EXPERIMENT_IDS) if args.experiment == "all" \
        else [args.experiment]
    for name in names:
        if name not in experiments.EXPERIMENT_IDS:
            raise ValueError(f"unknown experiment {name!r}")
    reports = []
    for name in names:
        rep = experiments.run_experiment(name, seed=seed, reps=args.reps,
                                         grid=args.grid, workers=args.workers)
        reports.append(rep)
        status = "pass" if rep.passed else "FAIL"
        print(f"{name}: {status} ({rep.wall_time_s:.1f}s)", file=sys.stderr)
        for c in rep.checks:
            if not c["passed"]:
                print(f"  {c['name']}: {c['value']:.6g} vs {c['threshold']}"
                      f" -- {c['detail']}", file=sys.stderr)
    if len(reports) == 1:
        text = _dump_json(reports[0].canonical_dict())
    else:
        text = _dump_json({
            "schema": 1,
            "passed": all(r.passed for r in reports),
            "reports": [r.canonical_dict() for r in reports],
        })
    _write(args.out, text)
    return 0 if all(r.passed for r in reports) else 1


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="vervaat",
        description="Exact combinatorics, path sampling, and statistical "
                    "verification for rotation-at-the-minimum path transforms.")
    sub = p.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("enumerate", help="exact lattice suite for one (n, a)")
    pe.add_argument("--n", type=int, required=True, help="walk length")
    pe.add_argument("--a", type=int, required=True,
                    help="endpoint, negative with n + a even")
    pe.add_argument("--out", help="output path for the JSON record (default stdout)")
    pe.set_defaults(func=_cmd_enumerate)

    ps = sub.add_parser("sample", help="draw paths to CSV")
    ps.add_argument("--process", required=True, choices=samplers.PROCESS_NAMES)
    ps.add_argument("--lambda", dest="lam", type=float, default=-1.0,
                    help="endpoint or drift level where applicable")
    ps.add_argument("--grid", type=int, default=experiments.DEFAULT_GRID,
                    help="uniform grid cells per path")
    ps.add_argument("--reps", type=int, default=1, help="number of paths")
    ps.add_argument("--seed", type=int, help="master seed; replicate r uses "
                    "stream id r (default VERVAAT_SEED or built-in)")
    ps.add_argument("--out", help="CSV output path (default stdout); header "
                    "t,value, paths separated by blank lines")
    ps.add_argument("--marginals", help="comma-separated times; emits one row "
                    "of path values per replicate instead of full paths")
    ps.set_defaults(func=_cmd_sample)

    pd = sub.add_parser("density", help="tabulate a closed-form law to CSV")
    pd.add_argument("--family", required=True,
                    choices=["fz", "fzhat", "fa", "fz-conditioned",
                             "meander-marginal", "maxwell", "rayleigh",
                             "arcsine"])
    pd.add_argument("--lambda", dest="lam", type=float, default=-1.0)
    pd.add_argument("--params", nargs="*",
                    help="extra key=value parameters (t=.., sigma=..)")
    pd.add_argument("--grid", type=int, default=101,
                    help="number of tabulation rows")
    pd.add_argument("--out", help="CSV output path (default stdout); "
                    "columns x,density,cdf")
    pd.set_defaults(func=_cmd_density)

    pm = sub.add_parser("minorant", help="convex minorant of sampled paths")
    pm.add_argument("--process", default="vervaat-direct",
                    choices=samplers.PROCESS_NAMES)
    pm.add_argument("--lambda", dest="lam", type=float, default=-1.0)
    pm.add_argument("--grid", type=int, default=experiments.DEFAULT_GRID)
    pm.add_argument("--reps", type=int, default=1,
                    help="1 emits slopes and vertices; more aggregates "
                    "a segment-count histogram")
    pm.add_argument("--seed", type=int)
    pm.add_argument("--out", help="JSON output path (default stdout)")
    pm.set_defaults(func=_cmd_minorant)

    pv = sub.add_parser("verify", help="run the named experiment suite")
    pv.add_argument("--experiment", default="all",
                    help="experiment id or 'all' (%s)" % ", ".join(
                        experiments.EXPERIMENT_IDS))
    pv.add_argument("--seed", type=int)
    pv.add_argument("--reps", type=int, default=experiments.DEFAULT_REPS)
    pv.add_argument("--grid", type=int, default=experiments.DEFAULT_GRID)
    pv.add_argument("--workers", type=int, default=1,
                    help="process count for replicate fan-out; reports are "
                    "byte-identical for any value")
    pv.add_argument("--out", help="JSON report path (default stdout)")
    pv.set_defaults(func=_cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
