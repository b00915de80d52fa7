"""Shift count generation for strided reorganization.

For an overlap-free strided layout (stride >= element width) the byte at
compact position i needs a shift of (stride - eewb) * (i // eewb) + offset
to reach (scatter) or leave (gather) its strided position. Index i always
counts compact-side bytes; the lane on the other side is i + shift.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import SimError
from .shiftnet import LaneRoute, NetKind


class ScgError(SimError):
    pass


class OutOfBeat(ScgError):
    pass


class OverlappingElements(ScgError):
    pass


@dataclass(frozen=True)
class ShiftPlan:
    beat_bytes: int
    mode: NetKind
    stride: int
    eewb: int
    offset: int
    n_elems: int
    shift_cnts: tuple[int, ...]  # one per compact byte, len == n_elems * eewb

    @property
    def n_valid(self) -> int:
        return self.n_elems * self.eewb

    def lane(self, i: int) -> tuple[bool, int]:
        """(valid, shift_cnt) for beat lane i, compact side."""
        if i < self.n_valid:
            return True, self.shift_cnts[i]
        return False, 0

    def lane_routes(self) -> list[LaneRoute]:
        if self.mode is NetKind.GATHER:
            return [LaneRoute(i + s, s) for i, s in enumerate(self.shift_cnts)]
        return [LaneRoute(i, s) for i, s in enumerate(self.shift_cnts)]

    def source_columns(self) -> list[int]:
        """Beat columns holding valid input bytes, in compact-byte order."""
        if self.mode is NetKind.GATHER:
            return [i + s for i, s in enumerate(self.shift_cnts)]
        return list(range(self.n_valid))

    def target_columns(self) -> list[int]:
        if self.mode is NetKind.GATHER:
            return list(range(self.n_valid))
        return [i + s for i, s in enumerate(self.shift_cnts)]


def gen_shift_plan(
    beat_bytes: int,
    stride: int,
    eewb: int,
    offset: int,
    n_elems: int,
    mode: NetKind,
) -> ShiftPlan:
    if stride < eewb:
        raise OverlappingElements(f"stride {stride} < element width {eewb}")
    if n_elems < 1 or offset < 0:
        raise ScgError(f"n_elems={n_elems}, offset={offset}")
    if offset + (n_elems - 1) * stride + eewb > beat_bytes:
        raise OutOfBeat(
            f"offset {offset} + {n_elems} elements at stride {stride} "
            f"exceed the {beat_bytes}-byte beat"
        )
    cnts = tuple(
        (stride - eewb) * (i // eewb) + offset for i in range(n_elems * eewb)
    )
    return ShiftPlan(beat_bytes, mode, stride, eewb, offset, n_elems, cnts)
