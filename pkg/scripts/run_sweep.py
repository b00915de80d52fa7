#!/usr/bin/env python3
"""Run the full preset grid and write sweep.csv / sweep.json.

Equivalent to `vecmemsim sweep` with file outputs; kept as a script so the
grid is easy to tweak when exploring other geometries or latencies.
"""

import argparse

from vecmemsim import bench
from vecmemsim.config import VectorConfig, parse_config_file, validate_config


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", help="key=value config file (default 512/64/512/512)")
    ap.add_argument("--n", type=int, default=48, help="instructions per trace")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--latency", type=int, default=bench.SWEEP_LATENCY)
    ap.add_argument("--out-csv", default="sweep.csv")
    ap.add_argument("--out-json", default="sweep.json")
    args = ap.parse_args()

    if args.config:
        cfg = parse_config_file(args.config)
    else:
        cfg = validate_config(VectorConfig(512, 64, 512, 512))

    rows, points = bench.sweep(
        cfg,
        n_instrs=args.n,
        seed=args.seed,
        latency=args.latency,
        out_csv=args.out_csv,
        out_json=args.out_json,
    )
    for p in points:
        m = p.report.metrics
        red = m["elementwise"].mem_requests / m["earth"].mem_requests
        cyc = m["elementwise"].sim_cycles / m["earth"].sim_cycles
        label = (
            f"stride={p.param}" if p.kind is bench.WorkloadKind.STRIDE_INTENSIVE
            else "fields=2-8"
        )
        print(
            f"{p.kind.value:8s} intensity={p.intensity:3d}% {label:10s} "
            f"request_reduction={red:6.2f}x cycle_speedup={cyc:5.2f}x"
        )
    print(f"wrote {args.out_csv} and {args.out_json} ({len(rows)} rows)")


if __name__ == "__main__":
    main()
