"""Workloads, the element-wise reference semantics, and the timing models.

Three models run the same trace:

* ``earth``      - the full coalescing simulator (vlsu.Simulator).
* ``elementwise``- the conventional baseline: unit-stride beats coalesce
  (every surveyed design does that) but strided/indexed/segment traffic is
  one request per element and field, with serialized writeback.
* ``segbuffer``  - like elementwise, except segment instructions issue one
  coalesced request per segment and then write rows back serially after the
  last response.

All three must finish with the architectural state of the element-wise
reference oracle; cycle counts only differ by their pipelining assumptions.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .config import (
    Direction,
    Pattern,
    SimError,
    VecMemInstr,
    VectorConfig,
    validate_instr,
)
from .rcvrf import ShiftedVRF
from .vlsu import (
    MemoryModel,
    Metrics,
    Reorder,
    SegmentApproach,
    Simulator,
    element_address,
    group_requests,
    split,
)


class BenchError(SimError):
    pass


class StateMismatch(BenchError):
    pass


class Model(Enum):
    EARTH = "earth"
    ELEMENT_WISE = "elementwise"
    SEG_BUFFER = "segbuffer"


class WorkloadKind(Enum):
    STRIDE_INTENSIVE = "stride"
    SEGMENT_INTENSIVE = "segment"
    MIXED = "mixed"


PRESET_INTENSITIES = (20, 40, 80, 95)
DEFAULT_ARENA_BYTES = 1 << 20


@dataclass(frozen=True)
class WorkloadSpec:
    kind: WorkloadKind
    intensity: int
    n_instrs: int
    seed: int
    stride_range: tuple[int, int] = (2, 32)
    field_range: tuple[int, int] = (2, 8)
    fixed_stride: Optional[int] = None
    fixed_fields: Optional[int] = None


@dataclass
class ArchState:
    registers: list[bytes]
    memory: bytes

    def dump(self) -> str:
        regs = {f"v{i}": r.hex() for i, r in enumerate(self.registers)}
        return json.dumps({"registers": regs, "memory": self.memory.hex()})

    def first_difference(self, other: "ArchState") -> Optional[str]:
        for i, (a, b) in enumerate(zip(self.registers, other.registers)):
            if a == b:
                continue
            for pos, (x, y) in enumerate(zip(a, b)):
                if x != y:
                    return f"register v{i} byte {pos}: {x:#04x} != {y:#04x}"
        if self.memory != other.memory:
            for pos, (x, y) in enumerate(zip(self.memory, other.memory)):
                if x != y:
                    return f"memory byte {pos:#x}: {x:#04x} != {y:#04x}"
        return None


@dataclass
class RunReport:
    config: VectorConfig
    seed: int
    metrics: dict[str, Metrics]
    speedup_requests: dict[str, float]
    speedup_cycles: dict[str, float]


def initial_state(
    cfg: VectorConfig, arena_bytes: int = DEFAULT_ARENA_BYTES, seed: int = 0
) -> ArchState:
    rng = random.Random(seed)
    return ArchState(
        registers=[bytes(cfg.vlen_bytes)] * cfg.n_vregs,
        memory=rng.randbytes(arena_bytes),
    )


# ---------------------------------------------------------------------------
# Element-wise reference semantics
# ---------------------------------------------------------------------------

def oracle_exec(trace, cfg: VectorConfig, initial: ArchState) -> ArchState:
    """Execute each instruction one element and field at a time; ISA ground truth."""
    regs = [bytearray(r) for r in initial.registers]
    mem = bytearray(initial.memory)
    for instr in trace:
        instr = validate_instr(cfg, instr)
        e = instr.eewb
        for i in range(instr.vl):
            for j in range(instr.fields):
                addr = element_address(instr, i, j)
                pos = i * e  # byte offset within the field's register group
                reg = instr.vd + j * instr.emul + pos // cfg.vlen_bytes
                off = pos % cfg.vlen_bytes
                for b in range(e):
                    a = addr + b
                    if instr.direction is Direction.LOAD:
                        regs[reg][off + b] = mem[a] if 0 <= a < len(mem) else 0
                    elif 0 <= a < len(mem):
                        mem[a] = regs[reg][off + b]
    return ArchState([bytes(r) for r in regs], bytes(mem))


# ---------------------------------------------------------------------------
# Request/cycle accounting for the baseline models
# ---------------------------------------------------------------------------

def _beats_of_range(lo: int, n_bytes: int, beat: int) -> int:
    return (lo + n_bytes - 1) // beat - lo // beat + 1


def elementwise_requests(cfg: VectorConfig, instr: VecMemInstr) -> int:
    beat = cfg.beat_bytes
    e = instr.eewb
    if instr.pattern is Pattern.UNIT_STRIDE:
        return _beats_of_range(instr.base, instr.vl * e, beat)
    total = 0
    for i in range(instr.vl):
        for j in range(instr.fields):
            total += _beats_of_range(element_address(instr, i, j), e, beat)
    return total


def segment_request_count(cfg: VectorConfig, instr: VecMemInstr) -> int:
    return len(group_requests(cfg, split(cfg, instr, SegmentApproach.SEGMENT_WISE)))


def _model_instr_cost(
    cfg: VectorConfig, instr: VecMemInstr, model: Model, latency: int
) -> tuple[int, int]:
    """(requests, cycles) one baseline model charges for one instruction."""
    if model is Model.ELEMENT_WISE:
        p = elementwise_requests(cfg, instr)
        return p, p + latency + 1
    if model is Model.SEG_BUFFER:
        if instr.pattern.is_segment:
            q = segment_request_count(cfg, instr)
            k = instr.fields * instr.emul
            return q, q + latency + k
        p = elementwise_requests(cfg, instr)
        return p, p + latency + 1
    raise BenchError(f"no analytic cost for {model}")


# ---------------------------------------------------------------------------
# Model runners
# ---------------------------------------------------------------------------

def run_model(
    trace,
    cfg: VectorConfig,
    model: Model,
    initial: Optional[ArchState] = None,
    latency: int = 0,
    reorder: Reorder = Reorder.IN_ORDER,
    seed: int = 0,
    segment_approach: SegmentApproach = SegmentApproach.SEGMENT_WISE,
) -> tuple[ArchState, Metrics]:
    if initial is None:
        initial = initial_state(cfg)
    trace = [validate_instr(cfg, i) for i in trace]

    if model is Model.EARTH:
        arena = bytearray(initial.memory)
        mem = MemoryModel(
            arena, cfg.beat_bytes, latency=latency, reorder=reorder, seed=seed
        )
        vrf = ShiftedVRF(cfg)
        for i, r in enumerate(initial.registers):
            vrf.write_row(i, r)
        sim = Simulator(cfg, mem, vrf, segment_approach=segment_approach)
        metrics = sim.run_trace(trace)
        state = ArchState(
            [vrf.read_row(i) for i in range(cfg.n_vregs)], bytes(arena)
        )
        return state, metrics

    state = oracle_exec(trace, cfg, initial)
    metrics = Metrics()
    for instr in trace:
        reqs, cycles = _model_instr_cost(cfg, instr, model, latency)
        metrics.count_requests(instr.pattern, reqs)
        metrics.sim_cycles += cycles
    return state, metrics


# ---------------------------------------------------------------------------
# Workload generation
# ---------------------------------------------------------------------------

def _filler_instr(cfg: VectorConfig, rng: random.Random, direction) -> VecMemInstr:
    # full-VLEN unit-stride traffic, the dominant pattern in mixed workloads
    eew = 64
    vl = cfg.vlen_bits // eew
    base = rng.randrange(0, DEFAULT_ARENA_BYTES - cfg.vlen_bytes, cfg.vlen_bytes)
    return VecMemInstr(
        pattern=Pattern.UNIT_STRIDE,
        direction=direction,
        base=base,
        eew_bits=eew,
        vl=vl,
        vd=rng.randrange(0, 31),
    )


def gen_workload(spec: WorkloadSpec, cfg: VectorConfig) -> list[VecMemInstr]:
    """Deterministic trace for an intensity preset.

    Each trace slot draws from its own RNG stream, so raising the intensity
    only converts filler slots into intensive ones and leaves every other
    instruction byte-identical (common random numbers across preset points).
    Strided bases are beat-aligned, as for a cache-line-aligned buffer.
    """
    n_hot = round(spec.n_instrs * spec.intensity / 100)
    instrs: list[VecMemInstr] = []
    for idx in range(spec.n_instrs):
        rng = random.Random(spec.seed * 1000003 + idx)
        direction = Direction.LOAD if idx % 3 != 2 else Direction.STORE
        hot = idx < n_hot
        if not hot:
            instrs.append(_filler_instr(cfg, rng, direction))
            continue
        if spec.kind is WorkloadKind.SEGMENT_INTENSIVE or (
            spec.kind is WorkloadKind.MIXED and idx % 2
        ):
            fields = spec.fixed_fields or rng.randint(*spec.field_range)
            vl = cfg.vlen_bits // 8
            span = vl * fields
            base = rng.randrange(0, DEFAULT_ARENA_BYTES - span)
            instrs.append(
                VecMemInstr(
                    pattern=Pattern.SEG_UNIT_STRIDE,
                    direction=direction,
                    base=base,
                    eew_bits=8,
                    vl=vl,
                    vd=rng.randrange(0, 32 - fields),
                    fields=fields,
                )
            )
        else:
            stride = spec.fixed_stride or rng.randint(*spec.stride_range)
            vl = cfg.vlen_bits // 8
            span = (vl - 1) * stride + 1
            base = rng.randrange(
                0, DEFAULT_ARENA_BYTES - span, cfg.beat_bytes
            )
            instrs.append(
                VecMemInstr(
                    pattern=Pattern.STRIDED,
                    direction=direction,
                    base=base,
                    eew_bits=8,
                    vl=vl,
                    vd=rng.randrange(0, 31),
                    stride=stride,
                )
            )
    return [validate_instr(cfg, i) for i in instrs]


def gen_random_trace(
    cfg: VectorConfig,
    n_instrs: int,
    seed: int,
    patterns: Optional[list[Pattern]] = None,
    max_vl: int = 16,
    allow_negative_stride: bool = True,
    arena_bytes: int = DEFAULT_ARENA_BYTES,
) -> list[VecMemInstr]:
    """Unconstrained random trace over all six patterns; used by the oracle tests."""
    rng = random.Random(seed)
    patterns = patterns or list(Pattern)
    arena = arena_bytes
    out = []
    for _ in range(n_instrs):
        pat = rng.choice(patterns)
        eew = rng.choice([8, 16, 32, 64])
        if eew > cfg.elen_bits:
            eew = cfg.elen_bits
        e = eew // 8
        direction = rng.choice([Direction.LOAD, Direction.STORE])
        fields = rng.randint(2, 8) if pat.is_segment else 1
        emul = 1
        cap = (cfg.vlen_bytes * emul) // e
        vl = rng.randint(1, min(max_vl, cap))
        vd = rng.randrange(0, cfg.n_vregs - fields * emul + 1)
        stride = 0
        indices = None
        base_span = 4096
        base = rng.randrange(base_span, arena - base_span)
        if pat.is_strided:
            stride = rng.randint(0, 3 * cfg.beat_bytes)
            if allow_negative_stride and not pat.is_segment and rng.random() < 0.4:
                stride = -stride
        if pat.is_indexed:
            indices = tuple(
                rng.randrange(-base_span // 2, base_span // 2) for _ in range(vl)
            )
        out.append(
            validate_instr(
                cfg,
                VecMemInstr(
                    pattern=pat,
                    direction=direction,
                    base=base,
                    eew_bits=eew,
                    vl=vl,
                    vd=vd,
                    stride=stride,
                    fields=fields,
                    emul=emul,
                    indices=indices,
                ),
            )
        )
    return out


# ---------------------------------------------------------------------------
# Trace files (one JSON object per line)
# ---------------------------------------------------------------------------

def trace_to_jsonl(trace) -> str:
    lines = []
    for instr in trace:
        obj = {
            "pattern": instr.pattern.value,
            "dir": instr.direction.value,
            "base": instr.base,
            "eew": instr.eew_bits,
            "vl": instr.vl,
            "vd": instr.vd,
            "fields": instr.fields,
            "emul": instr.emul,
        }
        if instr.pattern.is_strided:
            obj["stride"] = instr.stride
        if instr.indices is not None:
            obj["indices"] = list(instr.indices)
        lines.append(json.dumps(obj))
    return "\n".join(lines) + "\n"


def trace_from_jsonl(text: str, cfg: VectorConfig) -> list[VecMemInstr]:
    trace = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise BenchError(f"trace line {lineno}: {exc}")
        indices = obj.get("indices")
        trace.append(
            validate_instr(
                cfg,
                VecMemInstr(
                    pattern=Pattern(obj["pattern"]),
                    direction=Direction(obj["dir"]),
                    base=obj["base"],
                    eew_bits=obj["eew"],
                    vl=obj["vl"],
                    vd=obj["vd"],
                    stride=obj.get("stride", 0),
                    fields=obj.get("fields", 1),
                    emul=obj.get("emul", 1),
                    indices=tuple(indices) if indices is not None else None,
                ),
            )
        )
    return trace


# ---------------------------------------------------------------------------
# Reporting
# ---------------------------------------------------------------------------

CSV_COLUMNS = [
    "model",
    "pattern",
    "param",
    "intensity",
    "requests",
    "beats",
    "cycles",
    "speedup_vs_elementwise",
]


def compare_states(results: dict[Model, tuple[ArchState, Metrics]]):
    models = list(results)
    ref_state, _ = results[models[0]]
    for m in models[1:]:
        state, _ = results[m]
        diff = ref_state.first_difference(state)
        if diff is not None:
            raise StateMismatch(
                f"{models[0].value} vs {m.value}: first difference at {diff}"
            )


def report_rows(
    results: dict[Model, tuple[ArchState, Metrics]],
    param: str = "",
    intensity: str = "",
) -> list[dict]:
    ew_cycles = results[Model.ELEMENT_WISE][1].sim_cycles if Model.ELEMENT_WISE in results else 0
    rows = []
    for model, (_, metrics) in results.items():
        speedup = ew_cycles / metrics.sim_cycles if metrics.sim_cycles else 0.0
        for pattern, reqs in sorted(metrics.by_pattern.items()):
            rows.append(
                {
                    "model": model.value,
                    "pattern": pattern,
                    "param": param,
                    "intensity": intensity,
                    "requests": reqs,
                    "beats": reqs,
                    "cycles": metrics.sim_cycles,
                    "speedup_vs_elementwise": round(speedup, 4),
                }
            )
    return rows


def compare_and_report(
    results: dict[Model, tuple[ArchState, Metrics]],
    cfg: VectorConfig,
    seed: int = 0,
    out_csv: Optional[str] = None,
    out_json: Optional[str] = None,
    param: str = "",
    intensity: str = "",
) -> RunReport:
    compare_states(results)
    rows = report_rows(results, param=param, intensity=intensity)
    if out_csv:
        write_csv(out_csv, rows)
    report = RunReport(
        config=cfg,
        seed=seed,
        metrics={m.value: met for m, (_, met) in results.items()},
        speedup_requests={
            m.value: (
                results[Model.ELEMENT_WISE][1].mem_requests / met.mem_requests
                if met.mem_requests
                else 0.0
            )
            for m, (_, met) in results.items()
        },
        speedup_cycles={
            m.value: (
                results[Model.ELEMENT_WISE][1].sim_cycles / met.sim_cycles
                if met.sim_cycles
                else 0.0
            )
            for m, (_, met) in results.items()
        },
    )
    if out_json:
        with open(out_json, "w") as fh:
            json.dump(_report_json(report), fh, indent=1)
    return report


def _report_json(report: RunReport) -> dict:
    return {
        "config": {
            "vlen": report.config.vlen_bits,
            "elen": report.config.elen_bits,
            "dlen": report.config.dlen_bits,
            "mlen": report.config.mlen_bits,
        },
        "seed": report.seed,
        "metrics": {
            name: {
                "mem_requests": m.mem_requests,
                "beats_transferred": m.beats_transferred,
                "sim_cycles": m.sim_cycles,
                "by_pattern": m.by_pattern,
            }
            for name, m in report.metrics.items()
        },
        "speedup_requests": report.speedup_requests,
        "speedup_cycles": report.speedup_cycles,
    }


def write_csv(path_or_buf, rows: list[dict]):
    own = isinstance(path_or_buf, (str, bytes))
    fh = open(path_or_buf, "w", newline="") if own else path_or_buf
    try:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if own:
            fh.close()


# ---------------------------------------------------------------------------
# Preset sweep
# ---------------------------------------------------------------------------

SWEEP_LATENCY = 60  # DDR-class beat latency; dominates queue effects


@dataclass
class SweepPoint:
    kind: WorkloadKind
    intensity: int
    param: int  # stride bytes or "fields drawn from 2..param"
    report: RunReport


def sweep(
    cfg: VectorConfig,
    n_instrs: int = 48,
    seed: int = 0,
    latency: int = SWEEP_LATENCY,
    out_csv: Optional[str] = None,
    out_json: Optional[str] = None,
) -> tuple[list[dict], list[SweepPoint]]:
    """Run the intensity/stride and intensity/fields preset grids."""
    rows: list[dict] = []
    points: list[SweepPoint] = []
    strides = []
    s = 2
    while s <= cfg.beat_bytes // 2:
        strides.append(s)
        s *= 2

    for intensity in PRESET_INTENSITIES:
        for stride in strides:
            spec = WorkloadSpec(
                kind=WorkloadKind.STRIDE_INTENSIVE,
                intensity=intensity,
                n_instrs=n_instrs,
                seed=seed + stride,  # shared across intensities (CRN)
                fixed_stride=stride,
            )
            trace = gen_workload(spec, cfg)
            results = {
                m: run_model(trace, cfg, m, latency=latency) for m in Model
            }
            report = compare_and_report(
                results, cfg, seed=spec.seed, param=f"stride={stride}",
                intensity=str(intensity),
            )
            rows.extend(
                report_rows(results, param=f"stride={stride}", intensity=str(intensity))
            )
            points.append(SweepPoint(spec.kind, intensity, stride, report))

    for intensity in PRESET_INTENSITIES:
        spec = WorkloadSpec(
            kind=WorkloadKind.SEGMENT_INTENSIVE,
            intensity=intensity,
            n_instrs=n_instrs,
            seed=seed + 7919,
        )
        trace = gen_workload(spec, cfg)
        results = {m: run_model(trace, cfg, m, latency=latency) for m in Model}
        report = compare_and_report(
            results, cfg, seed=spec.seed, param="fields=2-8",
            intensity=str(intensity),
        )
        rows.extend(
            report_rows(results, param="fields=2-8", intensity=str(intensity))
        )
        points.append(SweepPoint(spec.kind, intensity, 0, report))

    if out_csv:
        write_csv(out_csv, rows)
    if out_json:
        with open(out_json, "w") as fh:
            json.dump(
                [
                    {
                        "kind": p.kind.value,
                        "intensity": p.intensity,
                        "param": p.param,
                        "report": _report_json(p.report),
                    }
                    for p in points
                ],
                fh,
                indent=1,
            )
    return rows, points
