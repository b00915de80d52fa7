import pytest
from hypothesis import given, strategies as st

from vecmemsim.config import ByteLane, INVALID_LANE, bytes_from_lanes
from vecmemsim.drom import (
    DromError,
    DromRequest,
    DromStage,
    StageFull,
    drom_gather,
    drom_pipeline_step,
    drom_scatter,
)
from vecmemsim.shiftnet import NetKind


def _beat(n, valid_cols):
    out = [INVALID_LANE] * n
    for col, payload in valid_cols.items():
        out[col] = ByteLane(True, payload)
    return out


def _full_beat(data):
    return [ByteLane(True, b) for b in data]


def legal_requests(beat, kind):
    @st.composite
    def build(draw):
        eewb = draw(st.sampled_from([1, 2, 4, 8]))
        stride = draw(st.integers(eewb, beat))
        max_n = (beat - eewb) // stride + 1
        n_elems = draw(st.integers(1, max_n))
        offset = draw(st.integers(0, beat - ((n_elems - 1) * stride + eewb)))
        data = draw(st.binary(min_size=beat, max_size=beat))
        return DromRequest(kind, stride, eewb, offset, n_elems, _full_beat(data))

    return build()


class TestGather:
    def test_stride4_eewb2_offset2_compacts(self):
        data = _beat(16, {2: 10, 3: 11, 6: 12, 7: 13, 10: 14, 11: 15, 14: 16, 15: 17})
        out = drom_gather(DromRequest(NetKind.GATHER, 4, 2, 2, 4, data))
        assert bytes_from_lanes(out[:8]) == bytes([10, 11, 12, 13, 14, 15, 16, 17])
        assert all(not ln.valid for ln in out[8:])

    def test_unit_stride_is_identity_on_prefix(self):
        data = _full_beat(bytes(range(16)))
        out = drom_gather(DromRequest(NetKind.GATHER, 2, 2, 0, 8, data))
        assert bytes_from_lanes(out) == bytes(range(16))

    def test_single_byte_stride5(self):
        data = _beat(16, {1: ord("P"), 6: ord("Q"), 11: ord("R")})
        out = drom_gather(DromRequest(NetKind.GATHER, 5, 1, 1, 3, data))
        assert bytes_from_lanes(out[:3]) == b"PQR"
        assert all(not ln.valid for ln in out[3:])

    def test_ignores_bytes_outside_plan(self):
        # a full beat in: only the planned strided columns survive the gather
        data = _full_beat(bytes(range(16)))
        out = drom_gather(DromRequest(NetKind.GATHER, 5, 1, 1, 3, data))
        assert bytes_from_lanes(out[:3]) == bytes([1, 6, 11])

    def test_mode_mismatch_rejected(self):
        with pytest.raises(DromError):
            drom_gather(DromRequest(NetKind.SCATTER, 4, 2, 0, 2, _beat(16, {})))


class TestScatter:
    def test_inverse_of_worked_gather(self):
        data = _beat(16, {i: 10 + i for i in range(8)})
        out = drom_scatter(DromRequest(NetKind.SCATTER, 4, 2, 2, 4, data))
        cols = [2, 3, 6, 7, 10, 11, 14, 15]
        for idx, col in enumerate(cols):
            assert out[col] == ByteLane(True, 10 + idx)
        for col in set(range(16)) - set(cols):
            assert not out[col].valid

    def test_single_byte_stride5(self):
        data = _beat(16, {0: ord("P"), 1: ord("Q"), 2: ord("R")})
        out = drom_scatter(DromRequest(NetKind.SCATTER, 5, 1, 1, 3, data))
        assert out[1].payload == ord("P")
        assert out[6].payload == ord("Q")
        assert out[11].payload == ord("R")

    def test_mode_mismatch_rejected(self):
        with pytest.raises(DromError):
            drom_scatter(DromRequest(NetKind.GATHER, 4, 2, 0, 2, _beat(16, {})))


class TestRoundTrip:
    def test_scatter_of_gather_is_identity_exhaustive_beat8(self):
        beat = 8
        for eewb in (1, 2, 4, 8):
            for stride in range(eewb, beat + 1):
                max_n = (beat - eewb) // stride + 1
                for n_elems in range(1, max_n + 1):
                    for offset in range(
                        0, beat - ((n_elems - 1) * stride + eewb) + 1
                    ):
                        data = _full_beat(bytes((37 * i + 5) % 256 for i in range(beat)))
                        g = drom_gather(
                            DromRequest(NetKind.GATHER, stride, eewb, offset, n_elems, data)
                        )
                        s = drom_scatter(
                            DromRequest(NetKind.SCATTER, stride, eewb, offset, n_elems, g)
                        )
                        for col in range(beat):
                            if s[col].valid:
                                assert s[col] == data[col]

    @given(req=legal_requests(64, NetKind.GATHER))
    def test_scatter_of_gather_is_identity_random_beat64(self, req):
        g = drom_gather(req)
        s = drom_scatter(
            DromRequest(NetKind.SCATTER, req.stride, req.eewb, req.offset, req.n_elems, g)
        )
        n_valid = sum(ln.valid for ln in s)
        assert n_valid == req.n_elems * req.eewb
        for col in range(64):
            if s[col].valid:
                assert s[col] == req.data[col]

    @given(
        req=st.one_of(
            legal_requests(32, NetKind.GATHER), legal_requests(32, NetKind.SCATTER)
        )
    )
    def test_valid_lane_count_preserved(self, req):
        fn = drom_gather if req.mode is NetKind.GATHER else drom_scatter
        out = fn(req)
        assert sum(ln.valid for ln in out) == req.n_elems * req.eewb


class TestPipeline:
    def _req(self, payload_base=0):
        data = _beat(16, {1: payload_base, 6: payload_base + 1, 11: payload_base + 2})
        return DromRequest(NetKind.GATHER, 5, 1, 1, 3, data)

    def test_depth1_output_one_step_later(self):
        stage = DromStage(depth=1)
        assert drom_pipeline_step(stage, self._req()) is None
        out = drom_pipeline_step(stage)
        assert bytes_from_lanes(out[:3]) == bytes([0, 1, 2])

    def test_fifo_order(self):
        stage = DromStage(depth=2)
        drom_pipeline_step(stage, self._req(10))
        first = drom_pipeline_step(stage, self._req(20))
        second = drom_pipeline_step(stage)
        assert bytes_from_lanes(first[:3]) == bytes([10, 11, 12])
        assert bytes_from_lanes(second[:3]) == bytes([20, 21, 22])

    def test_overfull_stage_rejected(self):
        with pytest.raises(StageFull):
            drom_pipeline_step(DromStage(depth=0), self._req())

    @given(
        reqs=st.lists(legal_requests(16, NetKind.GATHER), min_size=1, max_size=6),
        bubbles=st.lists(st.booleans(), min_size=0, max_size=12),
    )
    def test_bubbles_do_not_change_output_sequence(self, reqs, bubbles):
        # pipelined outputs equal the pure function applied in order,
        # regardless of where empty steps are inserted
        stage = DromStage(depth=len(reqs))
        outputs = []
        queue = list(reqs)
        schedule = list(bubbles) + [False] * (2 * len(reqs) + 2)
        for is_bubble in schedule:
            incoming = None if is_bubble or not queue else queue.pop(0)
            out = drom_pipeline_step(stage, incoming)
            if out is not None:
                outputs.append(out)
            if not queue and stage.occupancy == 0:
                break
        expected = [drom_gather(r) for r in reqs]
        assert outputs == expected
