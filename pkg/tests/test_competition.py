import numpy as np
import pytest

from dn2.competition import (
    DROP_NONE,
    DROP_TOP_DOWN,
    DROP_TOP_DOWN_LATERAL,
    compete,
    default_prescreen_width,
    dynamic_competition_set,
    prescreen,
)
from dn2.neuron import NegativeNeuron


def neg_with(values):
    values = np.asarray(values, dtype=float)
    return NegativeNeuron(
        owner=0,
        ids=np.arange(values.size, dtype=np.int64),
        values=values,
        fresh=np.zeros(values.size, dtype=bool),
    )


class TestPrescreen:
    def test_identical_sets_pass_through(self):
        r = {1: 0.9, 2: 0.8, 3: 0.7}
        out = prescreen(r, dict(r), dict(r), 3, 3, 3, k=2)
        assert out.s_p == {1, 2, 3}
        assert out.dropped == DROP_NONE

    def test_disjoint_top_down_forces_full_drop(self):
        r_b = {1: 0.9, 2: 0.8, 3: 0.1, 4: 0.1}
        r_t = {3: 0.9, 4: 0.8, 1: 0.0, 2: 0.0}
        r_l = {3: 0.9, 4: 0.9, 1: 0.0, 2: 0.0}
        out = prescreen(r_b, r_t, r_l, 2, 2, 2, k=2)
        assert out.s_p == out.s_b == {1, 2}
        assert out.dropped == DROP_TOP_DOWN_LATERAL

    def test_hand_worked_intersection(self):
        # ids 1..5; per-component top-3 sets {1,2,3}, {2,3,4}, {2,3,5}
        r_b = {1: 0.9, 2: 0.8, 3: 0.7, 4: 0.2, 5: 0.1}
        r_t = {2: 0.9, 3: 0.8, 4: 0.7, 5: 0.2, 1: 0.1}
        r_l = {2: 0.9, 3: 0.8, 5: 0.7, 1: 0.2, 4: 0.1}
        out = prescreen(r_b, r_t, r_l, 3, 3, 3, k=2)
        assert out.s_p == {2, 3}
        assert out.dropped == DROP_NONE

    def test_single_drop_of_top_down(self):
        r_b = {1: 0.9, 2: 0.8}
        r_t = {1: 0.0, 2: 0.9}
        r_l = {1: 0.9, 2: 0.8}
        out = prescreen(r_b, r_t, r_l, 1, 1, 1, k=1)
        assert out.dropped == DROP_TOP_DOWN
        assert out.s_p == {1}

    def test_s_p_subset_of_s_b_always(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            n = int(rng.integers(2, 12))
            ids = list(range(n))
            r_b = {i: float(rng.uniform(-1, 1)) for i in ids}
            r_t = {i: float(rng.uniform(-1, 1)) for i in ids}
            r_l = {i: float(rng.uniform(-1, 1)) for i in ids}
            k1 = int(rng.integers(1, n + 1))
            out = prescreen(r_b, r_t, r_l, k1, k1, k1, k=1)
            assert out.s_p <= out.s_b

    def test_widening_k1_never_shrinks_s_b(self):
        rng = np.random.default_rng(8)
        r_b = {i: float(rng.uniform(-1, 1)) for i in range(10)}
        prev: set = set()
        for k1 in range(1, 11):
            out = prescreen(r_b, {}, {}, k1, k1, k1, k=1)
            assert prev <= out.s_b
            prev = out.s_b

    def test_neurons_without_component_pass_that_screen(self):
        r_b = {1: 0.9, 2: 0.8}
        r_t = {1: 0.5}  # neuron 2 has no top-down section
        out = prescreen(r_b, r_t, {}, 1, 1, 1, k=1)
        assert 2 in out.s_t

    def test_bad_widths_rejected(self):
        with pytest.raises(ValueError):
            prescreen({1: 0.5}, {}, {}, 1, 1, 1, k=2)


class TestDynamicCompetitionSet:
    def test_uniform_weights_empty(self):
        assert dynamic_competition_set(neg_with([0.4, 0.4, 0.4])) == set()

    def test_hand_case(self):
        assert dynamic_competition_set(neg_with([0.9, 0.1, 0.2])) == {0}

    def test_single_component_empty(self):
        assert dynamic_competition_set(neg_with([0.7])) == set()

    def test_empty_field_rejected(self):
        with pytest.raises(ValueError):
            dynamic_competition_set(NegativeNeuron(owner=0))


class TestCompete:
    def test_winner_takes_one(self):
        pre = {0: 0.9, 1: 0.5}
        sets = {0: {1}, 1: {0}}
        out = compete(pre, sets, k=1)
        assert out.responses[0] == 1.0
        assert out.responses[1] == 0.0
        assert out.firers == {0}

    def test_top2_scaling(self):
        pre = {0: 0.9, 1: 0.8, 2: 0.5, 3: 0.3}
        member = {0, 1, 2, 3}
        sets = {i: member for i in pre}
        out = compete(pre, sets, k=2)
        assert out.responses[0] == pytest.approx(1.0)
        assert out.responses[1] == pytest.approx(0.75)
        assert out.responses[2] == 0.0
        assert out.responses[3] == 0.0

    def test_lonely_neuron_fires_at_one(self):
        out = compete({5: 0.2}, {5: set()}, k=1)
        assert out.responses[5] == 1.0

    def test_degenerate_denominator_fallback(self):
        pre = {0: 0.5, 1: 0.5, 2: 0.5}
        sets = {i: {0, 1, 2} for i in pre}
        out = compete(pre, sets, k=1)
        assert out.firers == {0}  # tie broken toward the lower id
        assert out.responses[0] == 1.0

    def test_firers_in_unit_interval(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            n = int(rng.integers(2, 10))
            pre = {i: float(rng.uniform(-1, 1)) for i in range(n)}
            sets = {i: set(rng.choice(n, size=rng.integers(0, n), replace=False).tolist()) for i in range(n)}
            out = compete(pre, sets, k=int(rng.integers(1, 3)))
            for i in out.firers:
                assert 0.0 < out.responses[i] <= 1.0

    def test_scale_invariance_of_selection(self):
        rng = np.random.default_rng(6)
        pre = {i: float(rng.uniform(0.1, 1)) for i in range(8)}
        sets = {i: set(range(8)) for i in range(8)}
        base = compete(pre, sets, k=2).firers
        scaled = compete({i: 3.7 * v for i, v in pre.items()}, sets, k=2).firers
        assert base == scaled

    def test_missing_pre_response_rejected(self):
        with pytest.raises(KeyError):
            compete({0: 1.0}, {1: set()}, k=1)


def test_default_prescreen_width_grows_with_population():
    assert default_prescreen_width(1, 10) == 2
    assert default_prescreen_width(1, 100) == 5
    assert default_prescreen_width(3, 10) == 6
