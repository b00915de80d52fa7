"""Row/column-accessible vector register file.

Thirty-two architectural registers live in 8 banks of ELEN-bit blocks under a
circular-shifted mapping: block j of register i sits in bank (i+j) mod 8, and
all blocks of one register share a row. Row access rotates one row of banks
back into register order; column access reads one block from each of up to 8
banks in parallel (each at its own row), rotates, then gathers the addressed
bytes with the reorganization module at a constant stride of emul * ELEN/8.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

from .config import ByteLane, INVALID_LANE, SimError, VectorConfig
from .drom import DromRequest, drom_gather, drom_scatter
from .shiftnet import NetKind


class RcvrfError(SimError):
    pass


class FieldOverflow(RcvrfError):
    pass


def map_block(cfg: VectorConfig, i: int, j: int) -> tuple[int, int]:
    """(bank, row) of block j of register i under the circular-shifted scheme."""
    k = (i + j) % cfg.n_banks
    r = ((i // cfg.n_banks) * cfg.blocks_per_reg + i % cfg.n_banks) % cfg.n_rows
    return k, r


def block_circular_shift(blocks: Sequence, amount: int) -> list:
    """Rotate a bank-row of blocks right by `amount` (negative rotates left)."""
    n = len(blocks)
    amount %= n
    return [blocks[(x - amount) % n] for x in range(n)]


@dataclass(frozen=True)
class ColumnSpec:
    base_vreg: int
    n_fields: int
    emul: int
    elem_byte_offset: int  # byte offset of the element inside the register group
    eewb: int


class ShiftedVRF:
    def __init__(self, cfg: VectorConfig):
        if not cfg.validated:
            raise RcvrfError("config must be validated first")
        self.cfg = cfg
        self.banks = [
            [bytearray(cfg.elen_bytes) for _ in range(cfg.n_rows)]
            for _ in range(cfg.n_banks)
        ]

    # ---- row-wise access -------------------------------------------------

    def read_row(self, i: int) -> bytes:
        cfg = self.cfg
        out = bytearray()
        for j in range(cfg.blocks_per_reg):
            k, r = map_block(cfg, i, j)
            out.extend(self.banks[k][r])
        return bytes(out)

    def write_row(self, i: int, value: bytes, byte_mask: Optional[Sequence[bool]] = None):
        cfg = self.cfg
        if len(value) != cfg.vlen_bytes:
            raise RcvrfError(f"row value must be {cfg.vlen_bytes} bytes")
        eb = cfg.elen_bytes
        for j in range(cfg.blocks_per_reg):
            k, r = map_block(cfg, i, j)
            block = self.banks[k][r]
            for b in range(eb):
                pos = j * eb + b
                if byte_mask is None or byte_mask[pos]:
                    block[b] = value[pos]

    def read_row_slice(self, i: int, start: int, width: int) -> bytes:
        return self.read_row(i)[start : start + width]

    def write_row_slice(self, i: int, start: int, lanes: list[ByteLane]):
        """Masked write of a lane slice at byte offset `start` of register i."""
        cfg = self.cfg
        eb = cfg.elen_bytes
        for col, lane in enumerate(lanes):
            if not lane.valid:
                continue
            pos = start + col
            j, b = divmod(pos, eb)
            k, r = map_block(cfg, i, j)
            self.banks[k][r][b] = lane.payload

    # ---- column-wise access ----------------------------------------------

    def _column_geometry(self, spec: ColumnSpec):
        cfg = self.cfg
        if spec.base_vreg + spec.n_fields * spec.emul > cfg.n_vregs:
            raise FieldOverflow(
                f"base {spec.base_vreg} + {spec.n_fields}x{spec.emul} fields "
                f"exceed {cfg.n_vregs} registers"
            )
        if spec.n_fields * spec.emul > cfg.n_banks:
            raise FieldOverflow("column access would revisit a bank")
        q, rem = divmod(spec.elem_byte_offset, cfg.vlen_bytes)
        j, o = divmod(rem, cfg.elen_bytes)
        if o + spec.eewb > cfg.elen_bytes:
            raise RcvrfError("element straddles an ELEN block")
        places = []
        for f in range(spec.n_fields):
            v = spec.base_vreg + f * spec.emul + q
            places.append(map_block(self.cfg, v, j))
        banks = [k for k, _ in places]
        assert len(set(banks)) == spec.n_fields, "bank conflict in column access"
        rot = spec.base_vreg + q + j
        return places, rot, o

    def read_column(self, spec: ColumnSpec) -> bytes:
        """Packed bytes of one element from each field register, ascending field."""
        cfg = self.cfg
        places, rot, o = self._column_geometry(spec)
        eb = cfg.elen_bytes
        raw: list[Optional[bytes]] = [None] * cfg.n_banks
        for k, r in places:
            raw[k] = bytes(self.banks[k][r])
        ordered = block_circular_shift(raw, -rot)
        lanes = []
        for block in ordered:
            if block is None:
                lanes.extend([INVALID_LANE] * eb)
            else:
                lanes.extend(ByteLane(True, b) for b in block)
        out = drom_gather(
            DromRequest(
                NetKind.GATHER, spec.emul * eb, spec.eewb, o, spec.n_fields, lanes
            )
        )
        return bytes(
            ln.payload for ln in out[: spec.n_fields * spec.eewb]
        )

    def write_column(
        self,
        spec: ColumnSpec,
        data: bytes,
        byte_mask: Optional[Sequence[bool]] = None,
    ):
        """Scatter packed field bytes back into the banks; mirror of read_column."""
        cfg = self.cfg
        places, rot, o = self._column_geometry(spec)
        eb = cfg.elen_bytes
        n_packed = spec.n_fields * spec.eewb
        if len(data) != n_packed:
            raise RcvrfError(f"expected {n_packed} packed bytes")
        lanes = [INVALID_LANE] * (cfg.n_banks * eb)
        for t in range(n_packed):
            if byte_mask is None or byte_mask[t]:
                lanes[t] = ByteLane(True, data[t])
        scattered = drom_scatter(
            DromRequest(
                NetKind.SCATTER, spec.emul * eb, spec.eewb, o, spec.n_fields, lanes
            )
        )
        blocks = [scattered[k * eb : (k + 1) * eb] for k in range(cfg.n_banks)]
        by_bank = block_circular_shift(blocks, rot)
        for k, r in places:
            target = self.banks[k][r]
            for b, lane in enumerate(by_bank[k]):
                if lane.valid:
                    target[b] = lane.payload

    # ---- diagnostics -----------------------------------------------------

    def dump_state(self) -> str:
        """Deterministic JSON dump of all registers in architectural order."""
        regs = {f"v{i}": self.read_row(i).hex() for i in range(self.cfg.n_vregs)}
        return json.dumps(regs, indent=1, sort_keys=False)
