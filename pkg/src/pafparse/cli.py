"""Command line: ``pafparse {gen,detect,parse,roundtrip,bench,compare}``.

Exit codes: 0 success, 1 usage, 2 data error, 3 a roundtrip/compare check failed.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from dataclasses import replace

from . import io
from .associate import ACCEPT_THRESHOLD, MIN_SUPPORT, N_SAMPLES
from .detect import THRESHOLD, WINDOW_RADIUS, detect_parts
from .errors import PafError
from .evaluate import (
    COMPARE_RENDER,
    COMPARE_SPEC,
    RenderParams,
    bench_parse,
    compare_strategies,
    roundtrip_checks,
    roundtrip_suite,
)
from .fields import SIGMA, SIGMA_LIMB, render_scene_fields
from .parse import ParseConfig, parse_poses
from .scenes import SceneSpec, random_scene
from .topology import load_topology


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--topology", default=None, help="built-in name or topology JSON path")
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--sigma-limb", type=float, default=None)
    p.add_argument("--samples", type=int, default=N_SAMPLES)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--matcher", choices=("hungarian", "greedy"), default="hungarian")
    p.add_argument("--min-parts", type=int, default=None)
    p.add_argument("--threshold", type=float, default=THRESHOLD, help="peak detection threshold")
    p.add_argument("--window", type=int, default=WINDOW_RADIUS, help="NMS window radius")
    p.add_argument("--accept", type=float, default=ACCEPT_THRESHOLD, help="limb acceptance threshold")
    p.add_argument("--min-support", type=float, default=MIN_SUPPORT)
    p.add_argument("--no-redundant", action="store_true")
    p.add_argument("--no-refine", action="store_true", help="skip sub-pixel peak refinement")
    p.add_argument("--interp", choices=("bilinear", "nearest"), default="bilinear")
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--out", default=None)
    p.add_argument("--human", action="store_true", help="aligned text instead of JSON")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="pafparse", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="scene spec -> scene JSON + field file")
    g.add_argument("--spec", help="SceneSpec JSON")
    g.add_argument("--index", type=int, default=0, help="scene number within the seeded stream")

    d = sub.add_parser("detect", parents=[common], help="field file -> candidates JSON")
    d.add_argument("fields")

    p = sub.add_parser("parse", parents=[common], help="field file -> pose file")
    p.add_argument("fields")
    p.add_argument("--candidates", help="candidates JSON from `detect`")

    r = sub.add_parser("roundtrip", parents=[common], help="render/detect/parse suite")
    r.add_argument("--spec")
    r.add_argument("--scenes", type=int, default=100)
    r.add_argument("--csv", help="write AP-vs-OKS-threshold CSV here")
    r.add_argument("--no-assert", action="store_true")

    b = sub.add_parser("bench", parents=[common], help="parse latency CSV")
    b.add_argument("--people", default="1,3,6,9,12")
    b.add_argument("--reps", type=int, default=1000)

    c = sub.add_parser("compare", parents=[common], help="hungarian vs greedy vs exhaustive")
    c.add_argument("--spec")
    c.add_argument("--instances", type=int, default=200)
    c.add_argument("--timing-instances", type=int, default=20)
    c.add_argument("--timings", action="store_true", help="include wall times in the output")
    return parser


def _load_spec(args, default: SceneSpec) -> SceneSpec:
    spec = default
    if getattr(args, "spec", None):
        with open(args.spec, encoding="utf-8") as fh:
            spec = SceneSpec.from_dict({**default.to_dict(), **json.load(fh)})
    overrides = {k: v for k, v in (("seed", args.seed), ("width", args.width), ("height", args.height),
                                   ("topology", args.topology)) if v is not None}
    return replace(spec, **overrides) if overrides else spec


def _render(args, default: RenderParams | None = None) -> RenderParams:
    base = default or RenderParams()
    return replace(base,
                   sigma=base.sigma if args.sigma is None else args.sigma,
                   sigma_l=base.sigma_l if args.sigma_limb is None else args.sigma_limb,
                   stride=args.stride, threshold=args.threshold, window_radius=args.window,
                   refine=not args.no_refine)


def _config(args, **defaults) -> ParseConfig:
    kw = dict(matcher=args.matcher, threshold=args.accept, min_support=args.min_support,
              n_samples=args.samples, interp=args.interp, use_redundant=not args.no_redundant)
    kw.update(defaults)
    if args.min_parts is not None:
        kw["min_parts"] = args.min_parts
    return ParseConfig(**kw)


def _emit(args, text: str, stdout) -> None:
    if args.out:
        io.atomic_write(args.out, text.encode("utf-8"))
    else:
        stdout.write(text)


def _cmd_gen(args, stdout):
    spec = _load_spec(args, SceneSpec())
    topo = spec.load_topology()
    scene = random_scene(spec, args.index, topo)
    render = _render(args, RenderParams(SIGMA, SIGMA_LIMB))
    stack = render_scene_fields(scene, topo, render.sigma, render.sigma_l, stride=render.stride)
    prefix = args.out or "scene"
    io.write_scene(scene, f"{prefix}.scene.json", topo)
    io.write_fields(stack, f"{prefix}.paff", topo)
    summary = {"scene": f"{prefix}.scene.json", "fields": f"{prefix}.paff", "n_people": scene.n_people,
               "topology": io.topology_ref(topo)}
    stdout.write(_fmt_summary(args, summary))
    return 0


def _fmt_summary(args, d) -> str:
    if args.human:
        return "".join(f"{k:<10} {v}\n" for k, v in d.items())
    return io.dump_json(d)


def _read_stack(args):
    topo = load_topology(args.topology) if args.topology else None
    stack = io.read_fields(args.fields, topo, stride=args.stride)
    if topo is None:
        topo = io._topology_for_hash(stack.topology_hash)
    return stack, topo


def _cmd_detect(args, stdout):
    stack, topo = _read_stack(args)
    cands = detect_parts(stack, args.threshold, args.window, not args.no_refine)
    doc = io.candidates_to_dict(cands, topo)
    if args.human:
        text = "".join(f"{topo.parts[j]:<14} {len(c)}\n" for j, c in enumerate(cands))
    else:
        text = io.dump_json(doc)
    _emit(args, text, stdout)
    return 0


def _cmd_parse(args, stdout):
    stack, topo = _read_stack(args)
    if args.candidates:
        with open(args.candidates, encoding="utf-8") as fh:
            cands = io.candidates_from_dict(json.load(fh), topo)
    else:
        cands = detect_parts(stack, args.threshold, args.window, not args.no_refine)
    persons = parse_poses(cands, stack, topo, config=_config(args))
    doc = io.poses_to_dict(persons, cands, topo)
    if args.human:
        text = "".join(f"person {i:<3} score {p.score:8.3f} parts {p.n_parts}\n" for i, p in enumerate(persons))
    else:
        text = io.dump_json(doc)
    _emit(args, text, stdout)
    return 0


def _cmd_roundtrip(args, stdout):
    spec = _load_spec(args, SceneSpec())
    report = roundtrip_suite(spec, args.scenes, _render(args), _config(args))
    checks = roundtrip_checks(report)
    report.checks = checks
    if args.csv:
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["oks_threshold", "ap", "precision", "recall"])
        for row in zip(report.thresholds, report.ap, report.precision, report.recall):
            w.writerow([f"{v:.6f}" for v in row])
        io.atomic_write(args.csv, buf.getvalue().encode())
    text = report.to_text() + "\n" if args.human else io.dump_json(report.to_dict(include_timings=False))
    _emit(args, text, stdout)
    return 0 if args.no_assert or all(checks.values()) else 3


def _cmd_bench(args, stdout):
    try:
        people = [int(x) for x in args.people.split(",") if x.strip()]
    except ValueError:
        raise UsageError("--people takes a comma-separated list of integers") from None
    cfg = _config(args)
    rows = [bench_parse(n, args.reps, args.topology or "coco18", args.seed, cfg) for n in people]
    buf = _io.StringIO()
    if args.human:
        buf.write(f"{'people':>6} {'mean_ms':>9} {'p50_ms':>9} {'p95_ms':>9}\n")
        for r in rows:
            buf.write(f"{r['n_people']:>6} {r['mean_ms']:>9.3f} {r['p50_ms']:>9.3f} {r['p95_ms']:>9.3f}\n")
    else:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n_people", "repetitions", "mean_ms", "p50_ms", "p95_ms"])
        for r in rows:
            w.writerow([r["n_people"], r["repetitions"], f"{r['mean_ms']:.6f}", f"{r['p50_ms']:.6f}",
                        f"{r['p95_ms']:.6f}"])
    _emit(args, buf.getvalue(), stdout)
    return 0


def _cmd_compare(args, stdout):
    spec = _load_spec(args, COMPARE_SPEC)
    cfg = _config(args, min_parts=1, min_score_per_part=0.0)
    report = compare_strategies(spec, args.instances, _render(args, COMPARE_RENDER), cfg,
                                timing_instances=args.timing_instances)
    if args.human:
        text = report.to_text() + "\n"
    else:
        text = io.dump_json(report.to_dict(include_timings=args.timings))
    _emit(args, text, stdout)
    return 0 if all(report.checks.values()) else 3


COMMANDS = {"gen": _cmd_gen, "detect": _cmd_detect, "parse": _cmd_parse, "roundtrip": _cmd_roundtrip,
            "bench": _cmd_bench, "compare": _cmd_compare}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args, stdout)
    except UsageError as exc:
        print(exc, file=stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (PafError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"pafparse: {type(exc).__name__}: {exc}", file=stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
