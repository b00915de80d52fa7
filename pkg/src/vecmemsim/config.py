"""Architecture parameters, instruction descriptors and byte-lane types.

Everything downstream (shift networks, DROM, LSDO, RCVRF, VLSU) consumes the
validated forms produced here. Configs and instructions are immutable after
validation and safe to share.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional


class SimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(SimError):
    pass


class NonPowerOfTwo(ConfigError):
    pass


class InconsistentWidths(ConfigError):
    pass


class NonIntegralRows(ConfigError):
    pass


class InstrError(SimError):
    pass


class RegGroupOverflow(InstrError):
    pass


class BadEEW(InstrError):
    pass


class MissingIndices(InstrError):
    pass


class Pattern(Enum):
    UNIT_STRIDE = "unit_stride"
    STRIDED = "strided"
    INDEXED = "indexed"
    SEG_UNIT_STRIDE = "seg_unit_stride"
    SEG_STRIDED = "seg_strided"
    SEG_INDEXED = "seg_indexed"

    @property
    def is_segment(self) -> bool:
        return self in (
            Pattern.SEG_UNIT_STRIDE,
            Pattern.SEG_STRIDED,
            Pattern.SEG_INDEXED,
        )

    @property
    def is_indexed(self) -> bool:
        return self in (Pattern.INDEXED, Pattern.SEG_INDEXED)

    @property
    def is_strided(self) -> bool:
        return self in (Pattern.STRIDED, Pattern.SEG_STRIDED)


class Direction(Enum):
    LOAD = "load"
    STORE = "store"


class ByteLane(NamedTuple):
    """One byte moving through the datapath; payload only meaningful if valid."""

    valid: bool
    payload: int


INVALID_LANE = ByteLane(False, 0)


def lanes_from_bytes(data: bytes) -> list[ByteLane]:
    return [ByteLane(True, b) for b in data]


def bytes_from_lanes(lanes: list[ByteLane], fill: int = 0) -> bytes:
    return bytes(ln.payload if ln.valid else fill for ln in lanes)


def valid_mask(lanes: list[ByteLane]) -> list[bool]:
    return [ln.valid for ln in lanes]


def _is_pow2(x: int) -> bool:
    return x > 0 and (x & (x - 1)) == 0


@dataclass(frozen=True)
class VectorConfig:
    vlen_bits: int
    elen_bits: int
    dlen_bits: int
    mlen_bits: int
    n_vregs: int = 32
    n_banks: int = 8
    # derived, populated by validate_config
    n_rows: int = 0
    beat_bytes: int = 0
    validated: bool = False

    @property
    def vlen_bytes(self) -> int:
        return self.vlen_bits // 8

    @property
    def elen_bytes(self) -> int:
        return self.elen_bits // 8

    @property
    def blocks_per_reg(self) -> int:
        return self.vlen_bits // self.elen_bits


def _mapping_is_bijective(cfg: VectorConfig) -> bool:
    # Same arithmetic as rcvrf.map_block; kept local so config does not
    # depend on the register-file module.
    seen = set()
    for i in range(cfg.n_vregs):
        r = (
            (i // cfg.n_banks) * cfg.blocks_per_reg + i % cfg.n_banks
        ) % cfg.n_rows
        for j in range(cfg.blocks_per_reg):
            k = (i + j) % cfg.n_banks
            if (k, r) in seen:
                return False
            seen.add((k, r))
    return len(seen) == cfg.n_banks * cfg.n_rows


def validate_config(raw: VectorConfig) -> VectorConfig:
    """Check invariants and fill in derived geometry (n_rows, beat_bytes)."""
    if raw.validated:
        return raw
    for name in ("vlen_bits", "elen_bits", "mlen_bits"):
        if not _is_pow2(getattr(raw, name)):
            raise NonPowerOfTwo(f"{name} = {getattr(raw, name)} is not a power of two")
    if raw.elen_bits > raw.vlen_bits:
        raise InconsistentWidths(f"ELEN {raw.elen_bits} > VLEN {raw.vlen_bits}")
    if raw.elen_bits > raw.mlen_bits:
        raise InconsistentWidths(f"ELEN {raw.elen_bits} > MLEN {raw.mlen_bits}")
    if raw.elen_bits < 8 or raw.elen_bits % 8:
        raise InconsistentWidths(f"ELEN {raw.elen_bits} is not a whole byte count")
    num = raw.vlen_bits * raw.n_vregs
    den = raw.elen_bits * raw.n_banks
    if num % den:
        raise NonIntegralRows(
            f"VLEN*{raw.n_vregs}/(ELEN*{raw.n_banks}) is not an integer"
        )
    cfg = dataclasses.replace(
        raw,
        n_rows=num // den,
        beat_bytes=raw.mlen_bits // 8,
        validated=True,
    )
    if not _is_pow2(cfg.beat_bytes):
        raise NonPowerOfTwo(f"beat_bytes = {cfg.beat_bytes} is not a power of two")
    if not _mapping_is_bijective(cfg):
        raise NonIntegralRows(
            "register-file mapping is not bijective for this geometry"
        )
    return cfg


_CONFIG_KEYS = {"vlen": "vlen_bits", "elen": "elen_bits",
                "dlen": "dlen_bits", "mlen": "mlen_bits"}


def parse_config_file(path: str) -> VectorConfig:
    """Parse a flat key=value config file (vlen/elen/dlen/mlen), case-insensitive."""
    values: dict[str, int] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, val = line.partition("=")
            key = key.strip().lower()
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[_CONFIG_KEYS[key]] = int(val.strip())
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: bad integer {val.strip()!r}")
    for want in _CONFIG_KEYS.values():
        if want not in values:
            raise ConfigError(f"{path}: missing key {want.removesuffix('_bits')}")
    return validate_config(VectorConfig(**values))


VALID_EEWS = (8, 16, 32, 64)
VALID_EMULS = (1, 2, 4, 8)


@dataclass(frozen=True)
class VecMemInstr:
    pattern: Pattern
    direction: Direction
    base: int
    eew_bits: int
    vl: int
    vd: int
    stride: int = 0
    fields: int = 1
    emul: int = 1
    indices: Optional[tuple[int, ...]] = None
    validated: bool = False

    @property
    def eewb(self) -> int:
        return self.eew_bits // 8


def validate_instr(cfg: VectorConfig, instr: VecMemInstr) -> VecMemInstr:
    """Check instruction invariants against a validated config. Idempotent."""
    if instr.validated:
        return instr
    if instr.eew_bits not in VALID_EEWS or instr.eew_bits > cfg.elen_bits:
        raise BadEEW(f"eew={instr.eew_bits}")
    if instr.emul not in VALID_EMULS:
        raise RegGroupOverflow(f"emul={instr.emul} not in {VALID_EMULS}")
    if instr.vl < 1:
        raise InstrError(f"vl={instr.vl}")
    if not (0 <= instr.vd < cfg.n_vregs):
        raise RegGroupOverflow(f"vd={instr.vd}")
    if instr.pattern.is_segment:
        if not (1 <= instr.fields <= 8):
            raise RegGroupOverflow(f"fields={instr.fields}")
        # RVV caps a segment instruction at 8 architectural registers; this
        # also guarantees distinct banks for every column access.
        if instr.fields * instr.emul > cfg.n_banks:
            raise RegGroupOverflow(
                f"fields*emul = {instr.fields * instr.emul} > {cfg.n_banks}"
            )
    elif instr.fields != 1:
        raise InstrError("fields only meaningful for segment patterns")
    if instr.vd + instr.fields * instr.emul > cfg.n_vregs:
        raise RegGroupOverflow(
            f"vd + fields*emul = {instr.vd + instr.fields * instr.emul} > {cfg.n_vregs}"
        )
    if instr.vl * instr.eewb > instr.emul * cfg.vlen_bytes:
        raise InstrError("vl exceeds register group capacity")
    if instr.pattern.is_indexed:
        if instr.indices is None or len(instr.indices) != instr.vl:
            raise MissingIndices(
                f"indexed pattern needs exactly vl={instr.vl} indices"
            )
    return dataclasses.replace(instr, validated=True)
