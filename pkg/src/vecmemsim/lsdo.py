"""Load/store data organization: Reverser -> DROM -> byte shifter.

Strided beats go through the full pipeline (element reversal for negative
strides, gather/scatter reorganization, then alignment to the register-row
slice). Everything else bypasses the Reverser and DROM and is only
byte-shifted between its beat offset and its row offset.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import ByteLane, INVALID_LANE, Pattern, SimError
from .drom import DromRequest, drom_gather, drom_scatter
from .scg import OutOfBeat
from .shiftnet import NetKind


class LsdoError(SimError):
    pass


@dataclass(frozen=True)
class LsdoCtrl:
    pattern: Pattern
    eewb: int
    beat_offset: int       # in-beat byte position of the first element/byte
    row_byte_offset: int   # byte position inside the target row slice
    n_bytes: int           # payload bytes carried by this beat
    stride_abs: int = 0
    stride_negative: bool = False

    @property
    def n_elems(self) -> int:
        return self.n_bytes // self.eewb

    @property
    def uses_drom(self) -> bool:
        return self.pattern is Pattern.STRIDED


def reverse_elements(data: list[ByteLane], eewb: int) -> list[ByteLane]:
    """Reverse the order of the beat's aligned eewb-wide elements."""
    n = len(data)
    if n % eewb:
        raise LsdoError(f"element width {eewb} does not divide beat {n}")
    out = []
    for e in range(n // eewb - 1, -1, -1):
        out.extend(data[e * eewb : (e + 1) * eewb])
    return out


def byte_shift(data: list[ByteLane], amount: int) -> list[ByteLane]:
    """Move every lane by `amount` columns, non-circular; vacated lanes invalid."""
    n = len(data)
    out = [INVALID_LANE] * n
    for col, lane in enumerate(data):
        if lane.valid:
            dst = col + amount
            if not (0 <= dst < n):
                raise OutOfBeat(f"lane {col} shifted by {amount} leaves the beat")
            out[dst] = lane
    return out


def _mask(data: list[ByteLane], lo: int, hi: int) -> list[ByteLane]:
    return [
        lane if lo <= col < hi else INVALID_LANE for col, lane in enumerate(data)
    ]


def _gather_offset(ctrl: LsdoCtrl, beat_bytes: int) -> int:
    # After element reversal the descending run becomes ascending; its first
    # element sits at the mirror of the original first-element offset.
    if ctrl.stride_negative:
        return beat_bytes - ctrl.eewb - ctrl.beat_offset
    return ctrl.beat_offset


def organize_load(ctrl: LsdoCtrl, beat: list[ByteLane]) -> list[ByteLane]:
    """Memory beat -> register-row write slice (valid lanes = write mask)."""
    if ctrl.uses_drom:
        data = beat
        if ctrl.stride_negative:
            data = reverse_elements(data, ctrl.eewb)
        data = drom_gather(
            DromRequest(
                NetKind.GATHER,
                ctrl.stride_abs,
                ctrl.eewb,
                _gather_offset(ctrl, len(beat)),
                ctrl.n_elems,
                data,
            )
        )
        return byte_shift(data, ctrl.row_byte_offset)
    data = _mask(beat, ctrl.beat_offset, ctrl.beat_offset + ctrl.n_bytes)
    return byte_shift(data, ctrl.row_byte_offset - ctrl.beat_offset)


def organize_store(ctrl: LsdoCtrl, row_slice: list[ByteLane]) -> list[ByteLane]:
    """Register-row slice -> memory beat write data (valid lanes = byte enables)."""
    if ctrl.uses_drom:
        data = _mask(
            row_slice, ctrl.row_byte_offset, ctrl.row_byte_offset + ctrl.n_bytes
        )
        data = byte_shift(data, -ctrl.row_byte_offset)
        data = drom_scatter(
            DromRequest(
                NetKind.SCATTER,
                ctrl.stride_abs,
                ctrl.eewb,
                _gather_offset(ctrl, len(row_slice)),
                ctrl.n_elems,
                data,
            )
        )
        if ctrl.stride_negative:
            data = reverse_elements(data, ctrl.eewb)
        return data
    data = _mask(
        row_slice, ctrl.row_byte_offset, ctrl.row_byte_offset + ctrl.n_bytes
    )
    return byte_shift(data, ctrl.beat_offset - ctrl.row_byte_offset)
