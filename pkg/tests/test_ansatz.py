from pathlib import Path

import numpy as np
import pytest

from qconv.ansatz import (FQCONV, HQCONV, AnsatzConfig, KernelShape,
                          build_ansatz, build_fqconv, build_hqconv,
                          channel_of_qubit, encode_window, init_params,
                          layout_qubit_index)
from qconv.circuits import CXPOW, CZPOW, RX, circuit_text

GOLDEN = Path(__file__).parent / "golden"


def pairs_of(circuit):
    return [(g.control, g.target) for g in circuit.gates if g.kind != RX]


class TestLayout:
    def test_first_qubit(self):
        assert layout_qubit_index(KernelShape(2, 2, 3), 1, 1) == 0

    def test_last_qubit(self):
        assert layout_qubit_index(KernelShape(2, 2, 3), 4, 3) == 11

    def test_second_channel_start(self):
        assert layout_qubit_index(KernelShape(2, 2, 3), 1, 2) == 4

    def test_bijective(self):
        shape = KernelShape(3, 2, 3)
        seen = {layout_qubit_index(shape, p, c)
                for c in range(1, 4) for p in range(1, 7)}
        assert seen == set(range(18))
        for q in range(18):
            c = channel_of_qubit(shape, q)
            assert layout_qubit_index(shape, q % 6 + 1, c) == q

    def test_ordinal_range(self):
        with pytest.raises(IndexError):
            layout_qubit_index(KernelShape(2, 2, 3), 5, 1)
        with pytest.raises(IndexError):
            layout_qubit_index(KernelShape(2, 2, 3), 1, 4)


class TestHqconv:
    def test_2x2x3_stride1_structure(self):
        circ = build_hqconv(KernelShape(2, 2, 3), 1)
        assert sum(1 for g in circ.gates if g.kind == RX) == 12
        assert len(pairs_of(circ)) == 2 * (9 + 2)
        assert circ.num_params == 22

    def test_2x2x1_stride1(self):
        circ = build_hqconv(KernelShape(2, 2, 1), 1)
        assert circ.num_data_angles == 4
        assert len(pairs_of(circ)) == 6
        assert circ.num_params == 6

    def test_2x2x3_stride3(self):
        circ = build_hqconv(KernelShape(2, 2, 3), 3)
        assert len(pairs_of(circ)) == 2 * (3 + 2)
        assert circ.num_params == 10

    def test_within_channel_except_cross_links(self):
        shape = KernelShape(2, 2, 3)
        circ = build_hqconv(shape, 1)
        pairs = pairs_of(circ)
        for c, t in pairs[:-4]:
            assert channel_of_qubit(shape, c) == channel_of_qubit(shape, t)
        for c, t in pairs[-4:]:
            assert channel_of_qubit(shape, t) == channel_of_qubit(shape, c) + 1

    def test_stride_invariant(self):
        with pytest.raises(ValueError, match="stride"):
            build_hqconv(KernelShape(2, 2, 3), 4)

    def test_golden_dump(self):
        circ = build_hqconv(KernelShape(2, 2, 3), 1)
        want = (GOLDEN / "hqconv_2x2x3_stride1.txt").read_text()
        assert circuit_text(circ) == want


class TestFqconv:
    def test_2x2x3_stride4(self):
        circ = build_fqconv(KernelShape(2, 2, 3), 4)
        assert len(pairs_of(circ)) == 16
        assert circ.num_params == 16

    def test_2x2x3_stride1(self):
        circ = build_fqconv(KernelShape(2, 2, 3), 1)
        assert circ.num_params == 22

    def test_2x2x3_stride11_boundary(self):
        circ = build_fqconv(KernelShape(2, 2, 3), 11)
        assert pairs_of(circ) == [(0, 11), (0, 11)]
        assert circ.num_params == 2

    def test_channel_separation_at_large_stride(self):
        shape = KernelShape(2, 2, 3)
        for stride in (4, 5, 6, 7, 8, 9, 10, 11):
            circ = build_fqconv(shape, stride)
            for c, t in pairs_of(circ):
                assert channel_of_qubit(shape, c) != channel_of_qubit(shape, t)

    def test_stride_invariant(self):
        with pytest.raises(ValueError, match="stride"):
            build_fqconv(KernelShape(2, 2, 3), 12)

    def test_golden_dump(self):
        circ = build_fqconv(KernelShape(2, 2, 3), 4)
        want = (GOLDEN / "fqconv_2x2x3_stride4.txt").read_text()
        assert circuit_text(circ) == want


class TestCountFormulas:
    def test_exhaustive_small_shapes(self):
        for s in range(1, 4):
            for t in range(1, 4):
                for c in range(1, 4):
                    if not 2 <= s * t * c <= 24:
                        continue
                    shape = KernelShape(s, t, c)
                    for stride in range(1, s * t):
                        circ = build_hqconv(shape, stride)
                        assert circ.num_params == 2 * (c * (s * t - stride)
                                                       + (c - 1))
                    for stride in range(1, s * t * c):
                        circ = build_fqconv(shape, stride)
                        assert circ.num_params == 2 * (s * t * c - stride)

    def test_each_param_used_once(self):
        circ = build_hqconv(KernelShape(3, 3, 2), 2)
        used = [g.param_index for g in circ.gates if g.kind != RX]
        assert sorted(used) == list(range(circ.num_params))

    def test_deterministic(self):
        a = build_fqconv(KernelShape(2, 3, 3), 5)
        b = build_fqconv(KernelShape(2, 3, 3), 5)
        assert a == b


class TestGateOrder:
    def test_cz_before_cx_in_every_pair(self):
        circ = build_hqconv(KernelShape(2, 2, 3), 1)
        entanglers = [g for g in circ.gates if g.kind != RX]
        for cz, cx in zip(entanglers[::2], entanglers[1::2]):
            assert cz.kind == CZPOW and cx.kind == CXPOW
            assert (cz.control, cz.target) == (cx.control, cx.target)

    def test_rx_prefix_in_layout_order(self):
        circ = build_fqconv(KernelShape(2, 2, 3), 4)
        prefix = circ.gates[:12]
        assert [g.kind for g in prefix] == [RX] * 12
        assert [g.target for g in prefix] == list(range(12))


class TestAnsatzConfig:
    def test_kind_check(self):
        with pytest.raises(ValueError, match="kind"):
            AnsatzConfig("qconv", KernelShape(2, 2, 1), 1)

    def test_build_dispatch(self):
        cfg = AnsatzConfig(HQCONV, KernelShape(2, 2, 3), 2)
        assert build_ansatz(cfg) == build_hqconv(KernelShape(2, 2, 3), 2)
        cfg = AnsatzConfig(FQCONV, KernelShape(2, 2, 3), 2,
                           observable_subset=(0, 5))
        assert build_ansatz(cfg).observable_subset == (0, 5)

    def test_kernel_size_caps(self):
        with pytest.raises(ValueError):
            KernelShape(1, 1, 1)
        with pytest.raises(ValueError, match="24"):
            KernelShape(5, 5, 3)


class TestEncodeWindow:
    def test_zeros_and_ones(self):
        shape = KernelShape(2, 2, 3)
        assert np.array_equal(encode_window(np.zeros((2, 2, 3)), shape),
                              np.zeros(12))
        assert np.allclose(encode_window(np.ones((2, 2, 3)), shape),
                           np.full(12, np.pi))

    def test_linear_map(self):
        shape = KernelShape(2, 2, 1)
        angles = encode_window(np.full((2, 2, 1), 0.25), shape)
        assert np.allclose(angles, np.pi / 4)

    def test_angle_order_matches_layout(self, rng):
        shape = KernelShape(2, 3, 3)
        window = rng.uniform(0, 1, (2, 3, 3))
        angles = encode_window(window, shape)
        for c in range(1, 4):
            for p in range(1, 7):
                r, col = divmod(p - 1, 3)
                q = layout_qubit_index(shape, p, c)
                assert angles[q] == window[r, col, c - 1] * np.pi

    def test_normalization_error(self):
        shape = KernelShape(2, 2, 1)
        bad = np.full((2, 2, 1), 1.5)
        with pytest.raises(ValueError, match="normalized"):
            encode_window(bad, shape)

    def test_count_error(self):
        with pytest.raises(ValueError, match="values"):
            encode_window(np.zeros(5), KernelShape(2, 2, 1))


def test_init_params_range_and_seeding():
    circ = build_fqconv(KernelShape(2, 2, 3), 4)
    a = init_params(circ, np.random.default_rng(7))
    b = init_params(circ, np.random.default_rng(7))
    assert np.array_equal(a, b)
    assert a.shape == (16,)
    assert a.min() >= -0.5 and a.max() <= 0.5
