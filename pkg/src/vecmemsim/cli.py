"""Command line front end: gen, run, compare, sweep."""

from __future__ import annotations

import argparse
import json
import sys

from . import bench
from .bench import Model, WorkloadKind, WorkloadSpec
from .config import SimError, VectorConfig, parse_config_file, validate_config
from .vlsu import Reorder, SegmentApproach


DEFAULT_CFG = dict(vlen_bits=512, elen_bits=64, dlen_bits=512, mlen_bits=512)


def _load_config(path) -> VectorConfig:
    if path:
        return parse_config_file(path)
    return validate_config(VectorConfig(**DEFAULT_CFG))


def _load_trace(path, cfg):
    with open(path) as fh:
        return bench.trace_from_jsonl(fh.read(), cfg)


def _initial(cfg, args) -> bench.ArchState:
    state = bench.initial_state(cfg, seed=getattr(args, "seed", 0))
    image = getattr(args, "mem_image", None)
    if image:
        with open(image, "rb") as fh:
            blob = fh.read()
        mem = bytearray(state.memory)
        mem[: len(blob)] = blob[: len(mem)]
        state = bench.ArchState(state.registers, bytes(mem))
    return state


def cmd_gen(args) -> int:
    cfg = _load_config(args.config)
    spec = WorkloadSpec(
        kind=WorkloadKind(args.kind),
        intensity=args.intensity,
        n_instrs=args.n,
        seed=args.seed,
        fixed_stride=args.stride,
        fixed_fields=args.fields,
    )
    trace = bench.gen_workload(spec, cfg)
    text = bench.trace_to_jsonl(trace)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_run(args) -> int:
    cfg = _load_config(args.config)
    trace = _load_trace(args.trace, cfg)
    state, metrics = bench.run_model(
        trace,
        cfg,
        Model(args.model),
        initial=_initial(cfg, args),
        latency=args.latency,
        reorder=Reorder(args.reorder),
        seed=args.seed,
        segment_approach=SegmentApproach(args.segment_approach),
    )
    print(
        json.dumps(
            {
                "model": args.model,
                "mem_requests": metrics.mem_requests,
                "beats_transferred": metrics.beats_transferred,
                "sim_cycles": metrics.sim_cycles,
                "by_pattern": metrics.by_pattern,
            },
            indent=1,
        )
    )
    if args.dump_state:
        with open(args.dump_state, "w") as fh:
            fh.write(state.dump())
    return 0


def cmd_compare(args) -> int:
    cfg = _load_config(args.config)
    trace = _load_trace(args.trace, cfg)
    models = [Model(m.strip()) for m in args.models.split(",")]
    initial = _initial(cfg, args)
    results = {
        m: bench.run_model(
            trace, cfg, m, initial=initial, latency=args.latency, seed=args.seed
        )
        for m in models
    }
    try:
        report = bench.compare_and_report(
            results,
            cfg,
            seed=args.seed,
            out_csv=args.out_csv,
            out_json=args.out_json,
        )
    except bench.StateMismatch as exc:
        print(f"state mismatch: {exc}", file=sys.stderr)
        return 1
    for name, ratio in report.speedup_cycles.items():
        reqs = report.metrics[name].mem_requests
        print(f"{name}: requests={reqs} speedup_cycles={ratio:.3f}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    try:
        rows, points = bench.sweep(
            cfg,
            n_instrs=args.n,
            seed=args.seed,
            latency=args.latency,
            out_csv=args.out_csv,
            out_json=args.out_json,
        )
    except bench.StateMismatch as exc:
        print(f"state mismatch: {exc}", file=sys.stderr)
        return 1
    for p in points:
        req = p.report.speedup_requests[Model.EARTH.value]
        cyc = p.report.speedup_cycles[Model.EARTH.value]
        name = "stride" if p.kind is WorkloadKind.STRIDE_INTENSIVE else "fields"
        param = p.param if p.param else "2-8"
        print(
            f"{name}={param} intensity={p.intensity}%: "
            f"request_reduction={req:.2f}x cycle_speedup={cyc:.2f}x"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="vecmemsim", description=__doc__.strip().rstrip(".")
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a workload trace")
    g.add_argument("--config")
    g.add_argument("--kind", choices=[k.value for k in WorkloadKind],
                   default="stride")
    g.add_argument("--intensity", type=int, default=95)
    g.add_argument("--stride", type=int, default=None)
    g.add_argument("--fields", type=int, default=None)
    g.add_argument("--n", type=int, default=48)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(fn=cmd_gen)

    r = sub.add_parser("run", help="run one model over a trace")
    r.add_argument("--config")
    r.add_argument("--trace", required=True)
    r.add_argument("--model", choices=[m.value for m in Model],
                   default="earth")
    r.add_argument("--latency", type=int, default=0)
    r.add_argument("--reorder", choices=[x.value for x in Reorder],
                   default="inorder")
    r.add_argument("--segment-approach",
                   choices=[x.value for x in SegmentApproach],
                   default="segment_wise")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--mem-image")
    r.add_argument("--dump-state")
    r.set_defaults(fn=cmd_run)

    c = sub.add_parser("compare", help="run several models, diff final state")
    c.add_argument("--config")
    c.add_argument("--trace", required=True)
    c.add_argument("--models", default="earth,elementwise,segbuffer")
    c.add_argument("--latency", type=int, default=0)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--mem-image")
    c.add_argument("--out-csv")
    c.add_argument("--out-json")
    c.set_defaults(fn=cmd_compare)

    s = sub.add_parser("sweep", help="run the preset intensity grids")
    s.add_argument("--config")
    s.add_argument("--n", type=int, default=48)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--latency", type=int, default=bench.SWEEP_LATENCY)
    s.add_argument("--out-csv")
    s.add_argument("--out-json")
    s.set_defaults(fn=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
