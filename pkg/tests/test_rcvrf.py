import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from vecmemsim.rcvrf import (
    ColumnSpec,
    FieldOverflow,
    RcvrfError,
    ShiftedVRF,
    block_circular_shift,
    map_block,
)

from conftest import make_cfg


CFG_256 = make_cfg(256, 64, 256, 128)
CFG_512 = make_cfg(512, 64, 512, 512)


class TestMapBlock:
    def test_first_registers_land_on_diagonal(self):
        assert map_block(CFG_256, 0, 0) == (0, 0)
        assert map_block(CFG_256, 1, 0) == (1, 1)
        assert map_block(CFG_256, 7, 0) == (7, 7)

    def test_wrapped_register(self):
        # i=9: bank (9+0) mod 8 = 1, row (1*4 + 1) mod 16 = 5
        assert map_block(CFG_256, 9, 0) == (1, 5)

    @pytest.mark.parametrize("cfg", [CFG_256, CFG_512], ids=["256/64", "512/64"])
    def test_bijective(self, cfg):
        seen = set()
        for i in range(cfg.n_vregs):
            for j in range(cfg.blocks_per_reg):
                seen.add(map_block(cfg, i, j))
        assert len(seen) == cfg.n_vregs * cfg.blocks_per_reg
        assert len(seen) == cfg.n_banks * cfg.n_rows

    @pytest.mark.parametrize("cfg", [CFG_256, CFG_512], ids=["256/64", "512/64"])
    def test_consecutive_blocks_use_consecutive_banks(self, cfg):
        for i in range(cfg.n_vregs):
            for j in range(cfg.blocks_per_reg - 1):
                k0, _ = map_block(cfg, i, j)
                k1, _ = map_block(cfg, i, j + 1)
                assert k1 == (k0 + 1) % cfg.n_banks

    @pytest.mark.parametrize("cfg", [CFG_256, CFG_512], ids=["256/64", "512/64"])
    def test_eight_consecutive_registers_hit_distinct_banks(self, cfg):
        for j in range(cfg.blocks_per_reg):
            for base in range(cfg.n_vregs - 7):
                banks = {map_block(cfg, base + f, j)[0] for f in range(8)}
                assert len(banks) == 8


class TestBlockCircularShift:
    def test_zero_is_identity(self):
        blocks = list("ABCDEFGH")
        assert block_circular_shift(blocks, 0) == blocks

    def test_rotate_right_by_one(self):
        assert block_circular_shift(list("ABCDEFGH"), 1) == list("HABCDEFG")

    @given(amount=st.integers(-20, 20))
    def test_rotate_then_unrotate(self, amount):
        blocks = list(range(8))
        assert block_circular_shift(
            block_circular_shift(blocks, amount), -amount
        ) == blocks


class TestRowAccess:
    def test_fresh_vrf_reads_zero(self):
        vrf = ShiftedVRF(CFG_512)
        assert vrf.read_row(17) == bytes(CFG_512.vlen_bytes)

    @given(i=st.integers(0, 31), data=st.data())
    @settings(max_examples=40)
    def test_write_read_round_trip(self, i, data):
        vrf = ShiftedVRF(CFG_256)
        value = data.draw(
            st.binary(min_size=CFG_256.vlen_bytes, max_size=CFG_256.vlen_bytes)
        )
        vrf.write_row(i, value)
        assert vrf.read_row(i) == value

    def test_register_isolation(self):
        vrf = ShiftedVRF(CFG_256)
        vrf.write_row(0, bytes([0xAA]) * CFG_256.vlen_bytes)
        assert vrf.read_row(1) == bytes(CFG_256.vlen_bytes)

    def test_byte_mask(self):
        vrf = ShiftedVRF(CFG_256)
        vb = CFG_256.vlen_bytes
        vrf.write_row(3, bytes([0x11]) * vb)
        mask = [i % 2 == 0 for i in range(vb)]
        vrf.write_row(3, bytes([0x22]) * vb, byte_mask=mask)
        row = vrf.read_row(3)
        assert all(row[i] == (0x22 if i % 2 == 0 else 0x11) for i in range(vb))

    def test_row_slice_round_trip(self):
        from vecmemsim.config import lanes_from_bytes

        vrf = ShiftedVRF(CFG_512)
        vrf.write_row_slice(5, 10, lanes_from_bytes(b"\x01\x02\x03"))
        assert vrf.read_row_slice(5, 10, 3) == b"\x01\x02\x03"

    def test_wrong_width_rejected(self):
        vrf = ShiftedVRF(CFG_256)
        with pytest.raises(RcvrfError):
            vrf.write_row(0, b"short")


class TestColumnAccess:
    def _vrf_with_rows(self, cfg, regs):
        vrf = ShiftedVRF(cfg)
        rng = random.Random(7)
        rows = {}
        for i in regs:
            value = bytes(rng.randrange(256) for _ in range(cfg.vlen_bytes))
            vrf.write_row(i, value)
            rows[i] = value
        return vrf, rows

    def test_eight_field_first_bytes(self):
        vrf, rows = self._vrf_with_rows(CFG_512, range(8))
        spec = ColumnSpec(base_vreg=0, n_fields=8, emul=1, elem_byte_offset=0, eewb=1)
        assert vrf.read_column(spec) == bytes(rows[f][0] for f in range(8))

    def test_single_field_degenerates_to_row_bytes(self):
        vrf, rows = self._vrf_with_rows(CFG_512, [11])
        spec = ColumnSpec(base_vreg=11, n_fields=1, emul=1, elem_byte_offset=24, eewb=4)
        assert vrf.read_column(spec) == rows[11][24:28]

    @given(
        base=st.integers(0, 24),
        n_fields=st.integers(1, 8),
        elem=st.integers(0, 63),
        eewb=st.sampled_from([1, 2, 4, 8]),
    )
    @settings(max_examples=60)
    def test_column_read_matches_row_reads(self, base, n_fields, elem, eewb):
        if base + n_fields > 32:
            return
        cfg = CFG_512
        off = elem * eewb
        if off + eewb > cfg.vlen_bytes:
            return
        vrf, rows = self._vrf_with_rows(cfg, range(base, base + n_fields))
        spec = ColumnSpec(base, n_fields, 1, off, eewb)
        expect = b"".join(rows[base + f][off : off + eewb] for f in range(n_fields))
        assert vrf.read_column(spec) == expect

    @given(
        base=st.integers(0, 24),
        n_fields=st.integers(1, 8),
        elem=st.integers(0, 63),
        eewb=st.sampled_from([1, 2, 4, 8]),
        data=st.data(),
    )
    @settings(max_examples=60)
    def test_column_write_then_row_read(self, base, n_fields, elem, eewb, data):
        if base + n_fields > 32:
            return
        cfg = CFG_512
        off = elem * eewb
        if off + eewb > cfg.vlen_bytes:
            return
        packed = data.draw(
            st.binary(min_size=n_fields * eewb, max_size=n_fields * eewb)
        )
        vrf, rows = self._vrf_with_rows(cfg, range(base, base + n_fields))
        vrf.write_column(ColumnSpec(base, n_fields, 1, off, eewb), packed)
        for f in range(n_fields):
            row = bytearray(rows[base + f])
            row[off : off + eewb] = packed[f * eewb : (f + 1) * eewb]
            assert vrf.read_row(base + f) == bytes(row)

    def test_emul2_column_round_trip(self):
        cfg = CFG_512
        vrf, _ = self._vrf_with_rows(cfg, range(4, 12))
        # element 70 of an emul=2 group lives in the second register
        off = 70 * 1
        spec = ColumnSpec(base_vreg=4, n_fields=4, emul=2, elem_byte_offset=off, eewb=1)
        vrf.write_column(spec, b"\xde\xad\xbe\xef")
        assert vrf.read_column(spec) == b"\xde\xad\xbe\xef"
        assert vrf.read_row(5)[off - cfg.vlen_bytes] == 0xDE
        assert vrf.read_row(7)[off - cfg.vlen_bytes] == 0xAD

    def test_field_overflow_rejected(self):
        vrf = ShiftedVRF(CFG_512)
        with pytest.raises(FieldOverflow):
            vrf.read_column(ColumnSpec(28, 8, 1, 0, 1))
        with pytest.raises(FieldOverflow):
            vrf.read_column(ColumnSpec(0, 8, 2, 0, 1))


class TestDump:
    def test_dump_is_deterministic_json(self):
        vrf = ShiftedVRF(CFG_256)
        vrf.write_row(2, bytes(range(32)))
        d1, d2 = vrf.dump_state(), vrf.dump_state()
        assert d1 == d2
        obj = json.loads(d1)
        assert list(obj) == [f"v{i}" for i in range(32)]
        assert obj["v2"] == bytes(range(32)).hex()
