"""Vector load/store unit: address sequencing, coalescing and queues.

Instructions are split into micro-ops (mops) confined to a single aligned
beat and a single register-row window. Strided runs whose elements share a
beat coalesce into one gather/scatter mop; unit-stride and indexed traffic
becomes contiguous byte-range mops; segment instructions become per-segment
column mops (or derived per-field strided/indexed instructions).

Timing is desk-scale: one request issued per cycle, responses ready a fixed
latency after issue (optionally permuted), one reorganization beat and one
register-file access retired per cycle, with in-order release through the
load reorder buffer and in-order store-ack dequeue.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from .config import (
    ByteLane,
    Direction,
    INVALID_LANE,
    Pattern,
    SimError,
    VecMemInstr,
    VectorConfig,
    validate_instr,
)
from .lsdo import LsdoCtrl, byte_shift, organize_load, organize_store
from .rcvrf import ColumnSpec, ShiftedVRF


class VlsuError(SimError):
    pass


class QueueFull(VlsuError):
    pass


class SegmentApproach(Enum):
    SEGMENT_WISE = "segment_wise"
    FIELD_WISE = "field_wise"


class Reorder(Enum):
    IN_ORDER = "inorder"
    RANDOM_PERMUTE = "random"


@dataclass(frozen=True)
class RowTarget:
    vreg: int
    window_start: int  # byte offset of the write window inside the row


@dataclass(frozen=True)
class ColTarget:
    spec: ColumnSpec
    seg_lo: int  # byte range inside the packed segment covered by this mop
    seg_hi: int


@dataclass
class MicroOp:
    id: int
    instr_id: int
    addr: int         # lowest byte address touched
    n_bytes: int      # payload bytes carried
    span_bytes: int   # addr .. addr+span_bytes-1 inclusive footprint
    elem_start: int
    n_elems: int
    field_j: int
    ctrl: LsdoCtrl
    target: Union[RowTarget, ColTarget]

    def beat_addr(self, beat_bytes: int) -> int:
        first = self.addr // beat_bytes
        assert (self.addr + self.span_bytes - 1) // beat_bytes == first
        return first * beat_bytes


@dataclass
class Metrics:
    mem_requests: int = 0
    beats_transferred: int = 0
    sim_cycles: int = 0
    by_pattern: dict = field(default_factory=dict)

    def count_requests(self, pattern: Pattern, n: int):
        self.mem_requests += n
        self.beats_transferred += n
        self.by_pattern[pattern.value] = self.by_pattern.get(pattern.value, 0) + n

    def merge(self, other: "Metrics"):
        self.mem_requests += other.mem_requests
        self.beats_transferred += other.beats_transferred
        self.sim_cycles += other.sim_cycles
        for k, v in other.by_pattern.items():
            self.by_pattern[k] = self.by_pattern.get(k, 0) + v


# ---------------------------------------------------------------------------
# Address semantics
# ---------------------------------------------------------------------------

def element_address(instr: VecMemInstr, i: int, j: int = 0) -> int:
    p = instr.pattern
    if p is Pattern.UNIT_STRIDE:
        return instr.base + i * instr.eewb
    if p is Pattern.STRIDED:
        return instr.base + i * instr.stride
    if p is Pattern.INDEXED:
        return instr.base + instr.indices[i]
    if p is Pattern.SEG_UNIT_STRIDE:
        return instr.base + i * instr.fields * instr.eewb + j * instr.eewb
    if p is Pattern.SEG_STRIDED:
        return instr.base + i * instr.stride + j * instr.eewb
    if p is Pattern.SEG_INDEXED:
        return instr.base + instr.indices[i] + j * instr.eewb
    raise VlsuError(f"unknown pattern {p}")


# ---------------------------------------------------------------------------
# Splitting
# ---------------------------------------------------------------------------

class _MopBuilder:
    def __init__(self, cfg: VectorConfig, instr: VecMemInstr, instr_id: int = 0):
        self.cfg = cfg
        self.instr = instr
        self.instr_id = instr_id
        self.mops: list[MicroOp] = []

    def next_id(self) -> int:
        return len(self.mops)

    def row_window(self) -> int:
        return min(self.cfg.beat_bytes, self.cfg.vlen_bytes)

    def add_contiguous(self, addr: int, reg_byte: int, n_bytes: int,
                       elem_start: int, field_j: int = 0, vd: Optional[int] = None):
        """Emit bypass mops for a contiguous byte range, cut at beat and
        row-window boundaries."""
        cfg, instr = self.cfg, self.instr
        B = cfg.beat_bytes
        W = self.row_window()
        vd = instr.vd if vd is None else vd
        t = 0
        while t < n_bytes:
            a = addr + t
            d = reg_byte + t
            cut = min(
                n_bytes - t,
                B - a % B,
                W - d % W,
            )
            row_reg = vd + (d // cfg.vlen_bytes)
            in_row = d % cfg.vlen_bytes
            ctrl = LsdoCtrl(
                pattern=Pattern.UNIT_STRIDE,
                eewb=1,
                beat_offset=a % B,
                row_byte_offset=in_row % W,
                n_bytes=cut,
            )
            self.mops.append(
                MicroOp(
                    id=self.next_id(),
                    instr_id=self.instr_id,
                    addr=a,
                    n_bytes=cut,
                    span_bytes=cut,
                    elem_start=elem_start,
                    n_elems=max(1, cut // instr.eewb),
                    field_j=field_j,
                    ctrl=ctrl,
                    target=RowTarget(row_reg, (in_row // W) * W),
                )
            )
            t += cut

    def add_strided_run(self, elem_lo: int, n_elems: int):
        """Emit one coalesced gather/scatter mop for elements [lo, lo+n)."""
        cfg, instr = self.cfg, self.instr
        B = cfg.beat_bytes
        e = instr.eewb
        s = instr.stride
        addrs = [instr.base + (elem_lo + k) * s for k in range(n_elems)]
        first = addrs[0]
        low = min(addrs)
        span = max(addrs) - low + e
        d = elem_lo * e
        W = self.row_window()
        in_row = d % cfg.vlen_bytes
        ctrl = LsdoCtrl(
            pattern=Pattern.STRIDED,
            eewb=e,
            beat_offset=first % B,
            row_byte_offset=in_row % W,
            n_bytes=n_elems * e,
            stride_abs=abs(s),
            stride_negative=s < 0,
        )
        self.mops.append(
            MicroOp(
                id=self.next_id(),
                instr_id=self.instr_id,
                addr=low,
                n_bytes=n_elems * e,
                span_bytes=span,
                elem_start=elem_lo,
                n_elems=n_elems,
                field_j=0,
                ctrl=ctrl,
                target=RowTarget(
                    instr.vd + d // cfg.vlen_bytes, (in_row // W) * W
                ),
            )
        )


def split_unit(cfg: VectorConfig, instr: VecMemInstr) -> list[MicroOp]:
    b = _MopBuilder(cfg, instr)
    b.add_contiguous(instr.base, 0, instr.vl * instr.eewb, elem_start=0)
    return b.mops


def split_indexed(cfg: VectorConfig, instr: VecMemInstr) -> list[MicroOp]:
    b = _MopBuilder(cfg, instr)
    e = instr.eewb
    for i in range(instr.vl):
        b.add_contiguous(element_address(instr, i), i * e, e, elem_start=i)
    return b.mops


def _negative_coalescable(instr: VecMemInstr) -> bool:
    # Element reversal works at aligned eewb granularity only, so a negative
    # run coalesces only when every element lands eewb-aligned in the beat.
    return instr.base % instr.eewb == 0 and instr.stride % instr.eewb == 0


def split_strided(cfg: VectorConfig, instr: VecMemInstr) -> list[MicroOp]:
    b = _MopBuilder(cfg, instr)
    B = cfg.beat_bytes
    e = instr.eewb
    s = instr.stride
    degenerate = (
        s == 0
        or abs(s) < e                      # overlapping elements
        or abs(s) >= B                     # at most one element per beat
        or (s < 0 and not _negative_coalescable(instr))
    )
    if degenerate:
        for i in range(instr.vl):
            b.add_contiguous(element_address(instr, i), i * e, e, elem_start=i)
        return b.mops

    W = b.row_window()
    i = 0
    while i < instr.vl:
        a = element_address(instr, i)
        if a // B != (a + e - 1) // B:
            # element straddles a beat boundary: split it into byte fragments
            b.add_contiguous(a, i * e, e, elem_start=i)
            i += 1
            continue
        region = a // B
        window = (i * e) // W
        j = i + 1
        while j < instr.vl:
            aj = element_address(instr, j)
            if aj // B != region or (aj + e - 1) // B != region:
                break
            if (j * e) // W != window or ((j + 1) * e - 1) // W != window:
                break
            j += 1
        if j - i == 1:
            b.add_contiguous(a, i * e, e, elem_start=i)
        else:
            b.add_strided_run(i, j - i)
        i = j
    return b.mops


def split_segment(
    cfg: VectorConfig,
    instr: VecMemInstr,
    approach: SegmentApproach = SegmentApproach.SEGMENT_WISE,
) -> list[MicroOp]:
    if approach is SegmentApproach.FIELD_WISE and instr.direction is Direction.STORE:
        # field-wise stores write field j of every segment before field j+1;
        # if segments can overlap in memory that breaks element-order write
        # semantics, so such stores stay segment-wise
        seg_bytes = instr.fields * instr.eewb
        overlapping = (
            instr.pattern is Pattern.SEG_INDEXED
            or (instr.pattern is Pattern.SEG_STRIDED and abs(instr.stride) < seg_bytes)
        )
        if overlapping:
            approach = SegmentApproach.SEGMENT_WISE

    if approach is SegmentApproach.FIELD_WISE:
        mops = []
        for derived, j in derive_field_instrs(cfg, instr):
            sub = split(cfg, derived)
            for m in sub:
                m.field_j = j
            mops.extend(sub)
        for mid, m in enumerate(mops):
            m.id = mid
        return mops

    b = _MopBuilder(cfg, instr)
    B = cfg.beat_bytes
    e = instr.eewb
    seg_bytes = instr.fields * e
    for i in range(instr.vl):
        seg_addr = element_address(instr, i, 0)
        lo = 0
        while lo < seg_bytes:
            a = seg_addr + lo
            cut = min(seg_bytes - lo, B - a % B)
            spec = ColumnSpec(
                base_vreg=instr.vd,
                n_fields=instr.fields,
                emul=instr.emul,
                elem_byte_offset=i * e,
                eewb=e,
            )
            ctrl = LsdoCtrl(
                pattern=instr.pattern,
                eewb=1,
                beat_offset=a % B,
                row_byte_offset=0,
                n_bytes=cut,
            )
            b.mops.append(
                MicroOp(
                    id=b.next_id(),
                    instr_id=0,
                    addr=a,
                    n_bytes=cut,
                    span_bytes=cut,
                    elem_start=i,
                    n_elems=1,
                    field_j=-1,
                    ctrl=ctrl,
                    target=ColTarget(spec, lo, lo + cut),
                )
            )
            lo += cut
    return b.mops


def derive_field_instrs(
    cfg: VectorConfig, instr: VecMemInstr
) -> list[tuple[VecMemInstr, int]]:
    """Rewrite a segment instruction as one strided/indexed instruction per field."""
    out = []
    e = instr.eewb
    for j in range(instr.fields):
        if instr.pattern is Pattern.SEG_UNIT_STRIDE:
            pat, stride, indices = Pattern.STRIDED, instr.fields * e, None
        elif instr.pattern is Pattern.SEG_STRIDED:
            pat, stride, indices = Pattern.STRIDED, instr.stride, None
        else:
            pat, stride, indices = Pattern.INDEXED, 0, instr.indices
        derived = validate_instr(
            cfg,
            VecMemInstr(
                pattern=pat,
                direction=instr.direction,
                base=instr.base + j * e,
                eew_bits=instr.eew_bits,
                vl=instr.vl,
                vd=instr.vd + j * instr.emul,
                stride=stride,
                emul=instr.emul,
                indices=indices,
            ),
        )
        out.append((derived, j))
    return out


def split(
    cfg: VectorConfig,
    instr: VecMemInstr,
    approach: SegmentApproach = SegmentApproach.SEGMENT_WISE,
) -> list[MicroOp]:
    if instr.pattern is Pattern.UNIT_STRIDE:
        return split_unit(cfg, instr)
    if instr.pattern is Pattern.STRIDED:
        return split_strided(cfg, instr)
    if instr.pattern is Pattern.INDEXED:
        return split_indexed(cfg, instr)
    return split_segment(cfg, instr, approach)


def group_requests(
    cfg: VectorConfig, mops: list[MicroOp]
) -> list[tuple[int, list[MicroOp]]]:
    """Fold consecutive row-target mops on the same beat into one request.

    Column mops stay one request per segment access.
    """
    groups: list[tuple[int, list[MicroOp]]] = []
    for m in mops:
        beat = m.beat_addr(cfg.beat_bytes)
        if (
            groups
            and isinstance(m.target, RowTarget)
            and isinstance(groups[-1][1][-1].target, RowTarget)
            and groups[-1][0] == beat
        ):
            groups[-1][1].append(m)
        else:
            groups.append((beat, [m]))
    return groups


# ---------------------------------------------------------------------------
# Abstract beat memory
# ---------------------------------------------------------------------------

class MemoryModel:
    """Beat-wide memory with fixed latency and optional response permutation.

    Stores apply their byte enables at issue; the ack is what arrives later.
    """

    def __init__(
        self,
        arena: bytearray,
        beat_bytes: int,
        latency: int = 0,
        reorder: Reorder = Reorder.IN_ORDER,
        seed: int = 0,
        permute_window: int = 8,
    ):
        self.arena = arena
        self.beat_bytes = beat_bytes
        self.latency = latency
        self.reorder = reorder
        self.rng = random.Random(seed)
        self.permute_window = permute_window
        self.cycle = 0
        self.in_flight: list[tuple[int, int, int, Optional[bytes]]] = []

    def _due(self) -> int:
        due = self.cycle + self.latency
        if self.reorder is Reorder.RANDOM_PERMUTE:
            due += self.rng.randrange(self.permute_window)
        return due

    def issue_load(self, req_id: int, beat_addr: int):
        if beat_addr < 0:
            chunk = bytes(self.beat_bytes)
        else:
            chunk = bytes(self.arena[beat_addr : beat_addr + self.beat_bytes])
            if len(chunk) < self.beat_bytes:  # reads beyond the arena return zero
                chunk = chunk + bytes(self.beat_bytes - len(chunk))
        self.in_flight.append((self._due(), len(self.in_flight), req_id, chunk))

    def issue_store(self, req_id: int, beat_addr: int, lanes: list[ByteLane]):
        for col, lane in enumerate(lanes):
            a = beat_addr + col
            if lane.valid and 0 <= a < len(self.arena):
                self.arena[a] = lane.payload
        self.in_flight.append((self._due(), len(self.in_flight), req_id, None))

    def step(self) -> list[tuple[int, Optional[bytes]]]:
        """Advance one cycle; return (req_id, data-or-None) for completions."""
        self.cycle += 1
        done = sorted(e for e in self.in_flight if e[0] <= self.cycle)
        self.in_flight = [e for e in self.in_flight if e[0] > self.cycle]
        return [(rid, data) for _, _, rid, data in done]


def memory_step(mem: MemoryModel) -> list[tuple[int, Optional[bytes]]]:
    return mem.step()


# ---------------------------------------------------------------------------
# Simulator
# ---------------------------------------------------------------------------

@dataclass
class _LifqEntry:
    mop: MicroOp
    req_id: int


class Simulator:
    def __init__(
        self,
        cfg: VectorConfig,
        memory: MemoryModel,
        vrf: Optional[ShiftedVRF] = None,
        lifq_depth: int = 8,
        sifq_depth: int = 8,
        segment_approach: SegmentApproach = SegmentApproach.SEGMENT_WISE,
    ):
        if lifq_depth < 1 or sifq_depth < 1:
            raise QueueFull("queue depths must be at least 1")
        self.cfg = cfg
        self.mem = memory
        self.vrf = vrf if vrf is not None else ShiftedVRF(cfg)
        self.lifq_depth = lifq_depth
        self.sifq_depth = sifq_depth
        self.lrob_capacity = lifq_depth
        self.segment_approach = segment_approach
        self.metrics = Metrics()

    # -- register-side transfer helpers ------------------------------------

    def _load_writeback(self, mop: MicroOp, beat: bytes):
        lanes = [ByteLane(True, x) for x in beat]
        if isinstance(mop.target, RowTarget):
            out = organize_load(mop.ctrl, lanes)
            W = min(self.cfg.beat_bytes, self.cfg.vlen_bytes)
            self.vrf.write_row_slice(
                mop.target.vreg, mop.target.window_start, out[:W]
            )
        else:
            tgt = mop.target
            packed = tgt.spec.n_fields * tgt.spec.eewb
            width = max(len(lanes), packed)
            lo = mop.ctrl.beat_offset
            padded = [
                lanes[c] if lo <= c < lo + mop.ctrl.n_bytes and c < len(lanes)
                else INVALID_LANE
                for c in range(width)
            ]
            shifted = byte_shift(padded, tgt.seg_lo - mop.ctrl.beat_offset)
            mask = [tgt.seg_lo <= t < tgt.seg_hi for t in range(packed)]
            data = bytes(
                shifted[t].payload if mask[t] else 0 for t in range(packed)
            )
            self.vrf.write_column(tgt.spec, data, mask)

    def _store_data(self, mop: MicroOp) -> list[ByteLane]:
        B = self.cfg.beat_bytes
        if isinstance(mop.target, RowTarget):
            W = min(B, self.cfg.vlen_bytes)
            row = self.vrf.read_row_slice(mop.target.vreg, mop.target.window_start, W)
            lanes = [ByteLane(True, x) for x in row] + [INVALID_LANE] * (B - W)
            lo = mop.ctrl.row_byte_offset
            lanes = [
                ln if lo <= c < lo + mop.ctrl.n_bytes else INVALID_LANE
                for c, ln in enumerate(lanes)
            ]
            return organize_store(mop.ctrl, lanes)
        tgt = mop.target
        packed = self.vrf.read_column(tgt.spec)
        width = max(B, len(packed))
        lanes = [
            ByteLane(True, packed[t]) if tgt.seg_lo <= t < tgt.seg_hi else INVALID_LANE
            for t in range(len(packed))
        ] + [INVALID_LANE] * (width - len(packed))
        shifted = byte_shift(lanes, mop.ctrl.beat_offset - tgt.seg_lo)
        return shifted[:B]

    # -- instruction execution ---------------------------------------------

    def run_instr(self, instr: VecMemInstr) -> Metrics:
        instr = validate_instr(self.cfg, instr)
        mops = split(self.cfg, instr, self.segment_approach)
        groups = group_requests(self.cfg, mops)
        delta = Metrics()
        delta.count_requests(instr.pattern, len(groups))
        if instr.direction is Direction.LOAD:
            delta.sim_cycles = self._run_load(groups)
        else:
            delta.sim_cycles = self._run_store(groups)
        self.metrics.merge(delta)
        return delta

    def run_trace(self, instrs) -> Metrics:
        total = Metrics()
        for instr in instrs:
            total.merge(self.run_instr(instr))
        return total

    def _run_load(self, groups) -> int:
        pending = deque(groups)
        lifq: deque[_LifqEntry] = deque()
        lrob: dict[int, bytes] = {}
        next_req = 0
        cycle = 0
        while pending or lifq:
            cycle += 1
            # one request per cycle; the memory pipeline holds requests in
            # flight, the LIFQ only fixes the release order
            if pending:
                beat_addr, mops = pending.popleft()
                rid = next_req
                next_req += 1
                self.mem.issue_load(rid, beat_addr)
                for m in mops:
                    lifq.append(_LifqEntry(m, rid))
            for rid, data in self.mem.step():
                lrob[rid] = data
            # release strictly in allocation order, one reorganized beat/cycle
            if lifq and lifq[0].req_id in lrob:
                entry = lifq.popleft()
                self._load_writeback(entry.mop, lrob[entry.req_id])
                if not (lifq and lifq[0].req_id == entry.req_id):
                    del lrob[entry.req_id]
        return cycle

    def _run_store(self, groups) -> int:
        pending = deque(groups)
        sifq: deque[int] = deque()  # request ids awaiting ack, in order
        acked: set[int] = set()
        next_req = 0
        cycle = 0
        while pending or sifq:
            cycle += 1
            if pending:
                beat_addr, mops = pending.popleft()
                lanes = [INVALID_LANE] * self.cfg.beat_bytes
                for m in mops:
                    for col, ln in enumerate(self._store_data(m)):
                        if ln.valid:
                            lanes[col] = ln
                rid = next_req
                next_req += 1
                self.mem.issue_store(rid, beat_addr, lanes)
                sifq.append(rid)
            for rid, _ in self.mem.step():
                acked.add(rid)
            if sifq and sifq[0] in acked:
                acked.discard(sifq.popleft())
        return cycle
