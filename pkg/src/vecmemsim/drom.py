"""Data reorganization: shift-count generation composed with the networks.

drom_gather compacts stride-separated bytes to the front of the beat;
drom_scatter spreads a compact prefix back out. DromStage models the
two-buffer pipeline shape: node controls and data enqueue in lockstep and
a beat is routed when its entry is dequeued.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .config import ByteLane, INVALID_LANE, SimError
from .scg import ShiftPlan, gen_shift_plan
from .shiftnet import NetKind, NodeControl, ShiftNetwork, network, plan_routes, route


class DromError(SimError):
    pass


class StageFull(DromError):
    pass


@dataclass
class DromRequest:
    mode: NetKind
    stride: int
    eewb: int
    offset: int
    n_elems: int
    data: list[ByteLane]


def _masked_input(plan: ShiftPlan, data: list[ByteLane]) -> list[ByteLane]:
    """Keep only the plan's source columns; everything else becomes invalid."""
    masked = [INVALID_LANE] * len(data)
    for col in plan.source_columns():
        masked[col] = data[col]
    return masked


def _prepare(req: DromRequest) -> tuple[ShiftNetwork, NodeControl, list[ByteLane]]:
    n = len(req.data)
    plan = gen_shift_plan(n, req.stride, req.eewb, req.offset, req.n_elems, req.mode)
    net = network(n, req.mode)
    ctrl = plan_routes(net, plan.lane_routes())
    return net, ctrl, _masked_input(plan, req.data)


def drom_gather(req: DromRequest) -> list[ByteLane]:
    if req.mode is not NetKind.GATHER:
        raise DromError("gather request required")
    net, ctrl, lanes = _prepare(req)
    return route(net, ctrl, lanes)


def drom_scatter(req: DromRequest) -> list[ByteLane]:
    if req.mode is not NetKind.SCATTER:
        raise DromError("scatter request required")
    net, ctrl, lanes = _prepare(req)
    return route(net, ctrl, lanes)


@dataclass
class DromStage:
    depth: int = 1
    node_ctrl_buffer: deque = field(default_factory=deque)
    data_buffer: deque = field(default_factory=deque)

    @property
    def occupancy(self) -> int:
        return len(self.data_buffer)


def drom_pipeline_step(
    stage: DromStage, incoming: Optional[DromRequest] = None
) -> Optional[list[ByteLane]]:
    """Advance the stage one step: emit the oldest buffered beat, accept one new.

    Shift plans are computed at enqueue (the control buffer), routing happens
    at dequeue, so outputs trail inputs by at least one step.
    """
    out = None
    if stage.data_buffer:
        net, ctrl = stage.node_ctrl_buffer.popleft()
        lanes = stage.data_buffer.popleft()
        out = route(net, ctrl, lanes)
    if incoming is not None:
        if stage.occupancy >= stage.depth:
            raise StageFull(f"stage depth {stage.depth} exceeded")
        net, ctrl, lanes = _prepare(incoming)
        stage.node_ctrl_buffer.append((net, ctrl))
        stage.data_buffer.append(lanes)
    return out
