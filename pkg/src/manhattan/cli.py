"""Command-line surface for the oriented-lattice walk toolkit.

Exit status: 0 on success, 2 when a verified property is falsified (a
counterexample certificate is written next to the report), 1 on usage
or I/O errors. Every artifact embeds the full run configuration, so
identical invocations produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass

from . import mc, midedge, reduce as reduction, srw, verify
from .env import Environment, make_env
from .graph import ComponentCaps, component, window_census
from .render import render_svg
from .walk import run as run_walk


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


@dataclass
class RunConfig:
    command: str
    seed: int
    dimension: int
    window: tuple[tuple[int, int], tuple[int, int]] | None
    budget: int
    samples: int
    thresholds: tuple[int, ...] | None
    workers: int
    extra: dict

    def as_dict(self) -> dict:
        d = asdict(self)
        d["window"] = [list(r) for r in self.window] if self.window else None
        d["thresholds"] = list(self.thresholds) if self.thresholds else None
        return d


def _parse_window(text: str):
    try:
        xs, ys = text.split(",")
        x0, x1 = (int(v) for v in xs.split(":"))
        y0, y1 = (int(v) for v in ys.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            "window must look like X0:X1,Y0:Y1") from exc
    return ((x0, x1), (y0, y1))


def _parse_thresholds(text: str):
    return tuple(int(v) for v in text.split(","))


def _default_seed() -> int:
    raw = os.environ.get("MANHATTAN_SEED")
    return int(raw) if raw else 0


def _emit(payload: dict, out: str | None, fmt: str = "json") -> None:
    if fmt == "json":
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    else:
        text = payload["text"]
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _build_parser() -> _Parser:
    p = _Parser(prog="manhattan", description=__doc__)
    p.add_argument("--seed", type=int, default=None, help="master seed "
                   "(default: MANHATTAN_SEED env var, else 0)")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--window", type=_parse_window, default=None,
                   help="half-open window X0:X1,Y0:Y1")
    p.add_argument("--budget", type=int, default=1_000_000)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--thresholds", type=_parse_thresholds, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)
    p.add_argument("--format", dest="fmt", choices=("json", "csv", "svg"), default="json")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", help="run one walk and report its outcome")
    sub.add_parser("classify", help="cell/vertex census of a window")
    cp = sub.add_parser("components", help="component of a start vertex")
    cp.add_argument("--start", type=_parse_point, default=(0, 0))
    rp = sub.add_parser("reduce", help="reduce a window and report the maps")
    rp.add_argument("--half-width", type=int, default=1000)
    sub.add_parser("midedge", help="block lattice and mid-edge census of a window")
    sub.add_parser("tail", help="tail curve of the trajectory extent")
    sub.add_parser("renewal", help="renewal statistics")
    sub.add_parser("sizebias", help="size-bias identity estimate")
    sp = sub.add_parser("srw", help="exit-time survival and bounds")
    sp.add_argument("--L", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--table", action="store_true",
                    help="emit the CSV table for L' <= L, n' <= n")
    c3 = sub.add_parser("cycles3d", help="search for nontrivial 3D cycles")
    c3.add_argument("--search-budget", type=int, default=100_000)
    rd = sub.add_parser("render", help="render a window to SVG")
    rd.add_argument("--midedge", action="store_true", dest="show_midedge")
    rd.add_argument("--sign-lines", action="store_true", dest="show_sign_lines")
    rd.add_argument("--trajectory", action="store_true")
    vp = sub.add_parser("verify", help="run a verification suite")
    vp.add_argument("--suite", required=True,
                    choices=sorted(verify.SUITES) + ["all"])
    return p


def _parse_point(text: str):
    parts = text.split(",")
    return tuple(int(v) for v in parts)


def _seeded_env(args) -> Environment:
    return make_env(args.dim, seed=args.seed)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.seed is None:
        args.seed = _default_seed()
    cfg = RunConfig(
        command=args.command,
        seed=args.seed,
        dimension=args.dim,
        window=args.window,
        budget=args.budget,
        samples=args.samples,
        thresholds=args.thresholds,
        workers=args.workers,
        extra={},
    )
    try:
        return _dispatch(args, cfg)
    except (OSError, ValueError, KeyError) as exc:
        sys.stderr.write(f"manhattan: error: {exc}\n")
        return 1


def _dispatch(args, cfg: RunConfig) -> int:
    command = args.command
    window = args.window or ((-10, 11), (-10, 11))

    if command == "simulate":
        env = _seeded_env(args)
        out = run_walk(env, tuple([0] * args.dim), args.budget)
        payload = {
            "config": cfg.as_dict(),
            "absorption": out.absorption,
            "cycle_entry": out.cycle_entry,
            "period": out.period,
            "cycle": [list(v) for v in out.cycle_vertices],
            "max_sup_norm": out.max_sup_norm,
            "steps_executed": out.steps_executed,
            "footprint": out.footprint,
        }
        _emit(payload, args.out)
        return 0

    if command == "classify":
        env = _seeded_env(args)
        counts = window_census(env, window)
        if args.fmt == "csv":
            text = "kind,count\n" + "".join(
                f"{k},{counts[k]}\n" for k in sorted(counts))
            _emit({"text": f"# config {json.dumps(cfg.as_dict(), sort_keys=True)}\n" + text},
                  args.out, "csv")
        else:
            _emit({"config": cfg.as_dict(), "census": counts}, args.out)
        return 0

    if command == "components":
        env = _seeded_env(args)
        comp = component(env, args.start, ComponentCaps())
        payload = {
            "config": cfg.as_dict(),
            "origin": list(comp.origin),
            "size": comp.size,
            "diameter": comp.diameter,
            "trap": [list(v) for v in comp.trap] if comp.trap else None,
            "truncated": comp.truncated,
            "path_length": len(comp.path),
        }
        _emit(payload, args.out)
        return 0

    if command == "reduce":
        env = _seeded_env(args)
        _, maps = reduction.reduce_env(env, (-args.half_width, args.half_width))
        payload = {"config": cfg.as_dict()}
        for axis, rmap in maps.items():
            payload[f"axis{axis}"] = {
                "window": list(rmap.window),
                "A": list(rmap.A),
                "block_lengths": {str(k): v for k, v in sorted(rmap.block_lengths.items())},
                "B": list(rmap.B),
            }
        _emit(payload, args.out)
        return 0

    if command == "midedge":
        env = _seeded_env(args)
        bl = midedge.block_lattice(env, window)
        meg = midedge.midedge_graph(bl)
        payload = {
            "config": cfg.as_dict(),
            "v_lines": list(bl.v_lines),
            "h_lines": list(bl.h_lines),
            "kinds": {f"{vx},{hy}": k for (vx, hy), k in sorted(bl.kinds.items())},
            "midedge_vertices": len(meg.vertices),
            "interior_vertices": len(meg.interior),
        }
        _emit(payload, args.out)
        return 0

    if command == "tail":
        thresholds = args.thresholds or verify.TAIL_THRESHOLDS
        curve = mc.tail_curve(args.seed, thresholds, args.samples, args.budget,
                              workers=args.workers)
        if args.fmt == "csv":
            text = f"# config {json.dumps(cfg.as_dict(), sort_keys=True)}\n" + curve.to_csv()
            _emit({"text": text}, args.out, "csv")
        else:
            _emit({"config": cfg.as_dict(), **curve.as_dict()}, args.out)
        return 0

    if command == "renewal":
        rep = mc.renewal_stats(args.seed, args.samples, args.budget, workers=args.workers)
        _emit({"config": cfg.as_dict(), **rep.as_dict()}, args.out)
        return 0

    if command == "sizebias":
        rep = mc.size_bias_check(args.seed, args.samples, workers=args.workers)
        _emit({"config": cfg.as_dict(), **rep.as_dict()}, args.out)
        return 0

    if command == "srw":
        import math
        if args.table:
            text = (f"# config {json.dumps(cfg.as_dict(), sort_keys=True)}\n"
                    + srw.survival_table_csv(range(2, args.L + 1), range(args.n + 1)))
            _emit({"text": text}, args.out, "csv")
            return 0
        p = srw.survival(args.L, args.n)
        ph = srw.phi(args.L)
        payload = {
            "config": cfg.as_dict(),
            "L": args.L,
            "n": args.n,
            "survival": float(p),
            "survival_exact": f"{p.numerator}/{p.denominator}",
            "lower_bound": math.exp(-args.n * ph),
            "upper_bound": args.L * math.exp(-args.n * ph),
        }
        _emit(payload, args.out)
        return 0

    if command == "cycles3d":
        cfgs = mc.Search3DConfig(master_seed=args.seed, samples=args.samples,
                                 budget=args.search_budget)
        rep = mc.find_nontrivial_cycle_3d(cfgs)
        _emit({"config": cfg.as_dict(), **rep.as_dict()}, args.out)
        return 0

    if command == "render":
        env = _seeded_env(args)
        trajectory = None
        if args.trajectory:
            out = run_walk(env, (0, 0), args.budget, keep_prefix=10_000)
            trajectory = out.trajectory_prefix
        svg = render_svg(env, window, show_sign_lines=args.show_sign_lines,
                         show_midedge=args.show_midedge, trajectory=trajectory)
        _emit({"text": svg}, args.out, "svg")
        return 0

    if command == "verify":
        names = sorted(verify.SUITES) if args.suite == "all" else [args.suite]
        worst = 0
        for name in names:
            kwargs = {}
            if name in ("absorption2d", "renewal", "domination", "sizebias",
                        "tails", "threeD"):
                kwargs["workers"] = args.workers
            result = verify.run_suite(name, **kwargs)
            status = "ok" if result.ok else "FALSIFIED"
            sys.stdout.write(f"{name}: {status}\n")
            payload = {"config": cfg.as_dict(), **result.as_dict()}
            if args.out:
                path = args.out if len(names) == 1 else f"{args.out}.{name}.json"
                with open(path, "w", encoding="utf-8") as fh:
                    json.dump(payload, fh, sort_keys=True, indent=2)
                    fh.write("\n")
            if not result.ok:
                worst = 2
                if result.certificates and args.out:
                    cert_path = (args.out if len(names) == 1 else
                                 f"{args.out}.{name}.json") + ".certificates.json"
                    with open(cert_path, "w", encoding="utf-8") as fh:
                        json.dump(result.certificates, fh, sort_keys=True, indent=2)
                        fh.write("\n")
        return worst

    raise ValueError(f"unhandled command {command!r}")


if __name__ == "__main__":
    raise SystemExit(main())
