import numpy as np
import pytest

from dn2.neuron import (
    ACTIVE,
    BUFFERED,
    ComponentPreResponses,
    NegativeNeuron,
    Neuron,
    PatterningType,
    SynapseSection,
    init_from_input,
)
from dn2.normalize import VolumeState, normalize_with_volume


def make_neuron(code, d_x=4, d_y=3, d_z=5):
    ptype = PatterningType(code)
    sections = {}
    if ptype.has_x:
        sections["x"] = SynapseSection.fresh_over(np.arange(d_x), has_volume=True)
    if ptype.has_y:
        sections["y"] = SynapseSection.fresh_over(np.arange(d_y))
    if ptype.has_z:
        sections["z"] = SynapseSection.fresh_over(np.arange(d_z))
    return Neuron(id=0, type=ptype, sections=sections)


class TestPatterningType:
    def test_bits(self):
        t = PatterningType("101")
        assert t.has_x and not t.has_y and t.has_z

    def test_all_seven_codes(self):
        for code in ("001", "010", "011", "100", "101", "110", "111"):
            PatterningType(code)

    def test_no_bits_rejected(self):
        with pytest.raises(ValueError):
            PatterningType("000")

    def test_sections_must_match_type(self):
        with pytest.raises(ValueError):
            Neuron(id=0, type=PatterningType("100"), sections={})


class TestComponentPreResponses:
    def test_perfect_match_section_is_one(self):
        x = np.array([0.5, -1.0, 2.0, 0.1])
        n = init_from_input(0, PatterningType("100"), x_slice=x)
        comp = n.component_pre_responses(x=x, update_volume=False)
        assert comp.r_b == pytest.approx(1.0)
        assert comp.r_t is None and comp.r_l is None

    def test_orthogonal_is_zero(self):
        n = init_from_input(0, PatterningType("001"), z_slice=np.array([1.0, 0.0]))
        comp = n.component_pre_responses(z_prev=np.array([0.0, 1.0]))
        assert comp.r_t == 0.0

    def test_lateral_plus_bottom_up_type_perfect_lateral_orthogonal_bottom_up(self):
        y = np.array([0.0, 1.0, 0.0])
        n = init_from_input(0, PatterningType("110"), x_slice=np.array([1.0, 0.0, 0.0, 0.0]), y_slice=y)
        # memorized centered pattern is prop. to (3,-1,-1,-1); the probe
        # (1,2,1,0) is orthogonal to it after centering
        probe = np.array([1.0, 2.0, 1.0, 0.0])
        comp = n.component_pre_responses(x=probe, y_prev=y, update_volume=False)
        assert comp.r_l == pytest.approx(1.0)
        assert comp.r_t is None
        assert comp.r_b == pytest.approx(0.0, abs=1e-12)

    def test_buffered_synapses_do_not_contribute(self):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        n = init_from_input(0, PatterningType("100"), x_slice=x)
        n.sections["x"].status[:] = BUFFERED
        comp = n.component_pre_responses(x=x, update_volume=False)
        assert comp.r_b == 0.0


class TestTotalPreResponse:
    def test_all_sections_perfect_gives_one(self):
        n = make_neuron("111")
        comp = ComponentPreResponses(r_b=1.0, r_t=1.0, r_l=1.0)
        assert n.total_pre_response(comp) == 1.0

    def test_two_section_type_perfect_gives_one(self):
        n = make_neuron("011")
        comp = ComponentPreResponses(r_b=1.0, r_l=1.0)
        assert n.total_pre_response(comp) == 1.0

    def test_mean_of_components(self):
        n = make_neuron("111")
        comp = ComponentPreResponses(r_b=1.0, r_t=0.0, r_l=0.5)
        assert n.total_pre_response(comp) == pytest.approx(0.5)

    def test_bounded(self):
        rng = np.random.default_rng(2)
        n = make_neuron("111")
        for _ in range(100):
            comp = ComponentPreResponses(*rng.uniform(-1, 1, size=3))
            assert -1.0 <= n.total_pre_response(comp) <= 1.0


class TestInitFromInput:
    def test_memorization_scores_one(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            x = rng.normal(size=6)
            z = rng.uniform(0, 1, size=4)
            n = init_from_input(1, PatterningType("101"), x_slice=x, z_slice=z)
            comp = n.component_pre_responses(x=x, z_prev=z, update_volume=False)
            assert n.total_pre_response(comp) == pytest.approx(1.0, abs=1e-12)

    def test_firing_age_one(self):
        n = init_from_input(0, PatterningType("100"), x_slice=np.ones(3) + np.arange(3))
        assert n.firing_age == 1

    def test_deviation_seed(self):
        n = init_from_input(0, PatterningType("100"), x_slice=np.arange(4.0))
        assert np.allclose(n.sections["x"].deviations, 1.0 / np.sqrt(12))

    def test_weights_equal_normalized_input(self):
        x = np.array([2.0, 0.0, 0.0])
        n = init_from_input(0, PatterningType("100"), x_slice=x)
        expect, _ = normalize_with_volume(x, VolumeState())
        assert np.allclose(n.sections["x"].weights, expect[:-1])
        assert n.sections["x"].volume_weight == pytest.approx(expect[-1])


class TestNegativeNeuron:
    def test_growth(self):
        neg = NegativeNeuron(owner=0)
        neg.add_sources([0, 1, 2])
        assert neg.ids.size == 3
        assert neg.fresh.all()
