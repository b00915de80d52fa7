"""Layered gather/scatter shift networks.

A network over n byte lanes has log2(n)+1 node layers. Link layer l offers,
per column, a straight link and a diagonal link spanning 2**l columns; the
diagonal direction is fixed by the network kind: gather compacts toward
column 0, scatter spreads toward column n-1. Diagonals never wrap.

Routing works by binary decomposition of each lane's shift count: at link
layer l a lane takes the diagonal iff bit l of its shift count is set.
Route sets whose output separations shrink (gather) or grow (scatter)
relative to their input separations are conflict-free: no node is ever
visited by two valid lanes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from .config import ByteLane, INVALID_LANE, SimError


class ShiftNetError(SimError):
    pass


class WraparoundRequired(ShiftNetError):
    pass


class SeparationViolated(ShiftNetError):
    pass


class DuplicateTarget(ShiftNetError):
    pass


class ControlMismatch(ShiftNetError):
    pass


class NetKind(Enum):
    GATHER = "gather"
    SCATTER = "scatter"


class Sel(Enum):
    STRAIGHT = "straight"
    DIAGONAL = "diagonal"
    IDLE = "idle"


@dataclass(frozen=True)
class ShiftNetwork:
    n: int
    kind: NetKind

    def __post_init__(self):
        if self.n < 1 or self.n & (self.n - 1):
            raise ShiftNetError(f"lane count {self.n} is not a power of two")

    @property
    def n_link_layers(self) -> int:
        return self.n.bit_length() - 1  # log2(n)

    @property
    def n_node_layers(self) -> int:
        return self.n_link_layers + 1

    @property
    def step(self) -> int:
        """Sign of a diagonal link's column delta."""
        return -1 if self.kind is NetKind.GATHER else 1

    def span_bit(self, layer: int) -> int:
        """log2 span of the diagonal links at link layer `layer`.

        The scatter network mirrors the gather network in time: gather
        narrows spans toward the output (widest first), scatter widens
        them (narrowest last is widest first from its own input side), so
        gather decomposes shift counts LSB-first and scatter MSB-first.
        """
        if self.kind is NetKind.GATHER:
            return layer
        return self.n_link_layers - 1 - layer


@lru_cache(maxsize=None)
def network(n: int, kind: NetKind) -> ShiftNetwork:
    return ShiftNetwork(n, kind)


@dataclass(frozen=True)
class LaneRoute:
    """One lane entering at src and shifting shift_cnt columns network-ward."""

    src: int
    shift_cnt: int
    valid: bool = True

    def target(self, net: ShiftNetwork) -> int:
        return self.src + net.step * self.shift_cnt


@dataclass
class NodeControl:
    n: int
    # selections[l][col] drives the node at layer l, column col (l < link layers)
    selections: list[list[Sel]]
    expected_valid: list[bool]


def plan_routes(net: ShiftNetwork, routes: list[LaneRoute]) -> NodeControl:
    """Derive per-layer node selections by simulating the binary-decomposed walk.

    Raises if the route set cannot traverse the network: out-of-bounds shifts
    (WraparoundRequired), colliding targets (DuplicateTarget), or any two
    lanes meeting at an intermediate node (SeparationViolated).
    """
    live = [r for r in routes if r.valid]
    for r in live:
        if r.shift_cnt < 0 or not (0 <= r.src < net.n):
            raise ShiftNetError(f"bad route {r}")
        if not (0 <= r.target(net) < net.n):
            raise WraparoundRequired(
                f"src {r.src} shift {r.shift_cnt} leaves the {net.n}-lane beat"
            )
    targets = [r.target(net) for r in live]
    if len(set(targets)) != len(targets):
        raise DuplicateTarget(f"targets {sorted(targets)} collide")

    selections = [[Sel.IDLE] * net.n for _ in range(net.n_link_layers)]
    expected = [False] * net.n
    pos = {}
    for r in live:
        if r.src in pos:
            raise SeparationViolated(f"two lanes enter at column {r.src}")
        pos[r.src] = r.src
        expected[r.src] = True

    for layer in range(net.n_link_layers):
        bit = net.span_bit(layer)
        occupied: dict[int, int] = {}
        for r in live:
            p = pos[r.src]
            take_diag = (r.shift_cnt >> bit) & 1
            sel = Sel.DIAGONAL if take_diag else Sel.STRAIGHT
            if selections[layer][p] not in (Sel.IDLE, sel):
                raise SeparationViolated(
                    f"conflicting selections at layer {layer} column {p}"
                )
            selections[layer][p] = sel
            if take_diag:
                p += net.step * (1 << bit)
            if p in occupied:
                raise SeparationViolated(
                    f"lanes from {occupied[p]} and {r.src} meet at "
                    f"layer {layer + 1} column {p}"
                )
            occupied[p] = r.src
            pos[r.src] = p
    return NodeControl(net.n, selections, expected)


def route(net: ShiftNetwork, ctrl: NodeControl, lanes: list[ByteLane]) -> list[ByteLane]:
    """Move lanes through the network under a planned control.

    Lanes valid at unplanned columns raise ControlMismatch. Planned columns
    carrying an invalid lane simply produce no output (the hole propagates).
    """
    if len(lanes) != net.n or ctrl.n != net.n:
        raise ShiftNetError("lane/control width mismatch")
    moving: list[tuple[int, ByteLane]] = []
    for col, lane in enumerate(lanes):
        if lane.valid and not ctrl.expected_valid[col]:
            raise ControlMismatch(f"unexpected valid lane at column {col}")
        if lane.valid:
            moving.append((col, lane))
    for layer in range(net.n_link_layers):
        nxt = []
        for p, lane in moving:
            sel = ctrl.selections[layer][p]
            if sel is Sel.IDLE:
                raise ControlMismatch(f"no plan for lane at layer {layer} column {p}")
            if sel is Sel.DIAGONAL:
                p += net.step * (1 << net.span_bit(layer))
            nxt.append((p, lane))
        moving = nxt
    out = [INVALID_LANE] * net.n
    for p, lane in moving:
        out[p] = lane
    return out


def check_conflict_free(net: ShiftNetwork, moves: list[tuple[int, int]]) -> bool:
    """True iff the (src, dst) pairs traverse the network with no node shared.

    Pure predicate: direction violations, wraparound, duplicate endpoints and
    intermediate-node collisions all return False.
    """
    shifts = {}
    for src, dst in moves:
        cnt = net.step * (dst - src)
        if cnt < 0 or not (0 <= src < net.n) or not (0 <= dst < net.n):
            return False
        if src in shifts:
            return False
        shifts[src] = cnt
    if len(set(dst for _, dst in moves)) != len(moves):
        return False
    pos = dict.fromkeys(shifts)
    for src in shifts:
        pos[src] = src
    for layer in range(net.n_link_layers):
        bit = net.span_bit(layer)
        occupied = set()
        for src, cnt in shifts.items():
            p = pos[src]
            if (cnt >> bit) & 1:
                p += net.step * (1 << bit)
            if p in occupied:
                return False
            occupied.add(p)
            pos[src] = p
    return True


def debug_dump(net: ShiftNetwork, routes: list[LaneRoute]) -> str:
    """Render per-layer node occupancy for a route set (diagnostics only)."""
    live = [r for r in routes if r.valid]
    pos = {r.src: r.src for r in live}
    lines = []
    for layer in range(net.n_node_layers):
        cols = ["."] * net.n
        for src, p in pos.items():
            cols[p] = "*" if cols[p] == "." else "X"
        lines.append(f"layer {layer}: " + "".join(cols))
        if layer < net.n_link_layers:
            bit = net.span_bit(layer)
            for r in live:
                if (r.shift_cnt >> bit) & 1:
                    pos[r.src] += net.step * (1 << bit)
    return "\n".join(lines)
