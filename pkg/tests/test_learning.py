import numpy as np
import pytest

from dn2.learning import (
    AmnesicSchedule,
    CANDID,
    amnesic_rates,
    excitatory_update,
    inhibitory_update,
    update_deviations,
)
from dn2.neuron import NegativeNeuron, PatterningType, SynapseSection, Neuron, init_from_input
from dn2.normalize import unit_normalize


def fresh_neuron(code="001", d=4):
    ptype = PatterningType(code)
    sections = {}
    if ptype.has_x:
        sections["x"] = SynapseSection.fresh_over(np.arange(d), has_volume=True)
    if ptype.has_z:
        sections["z"] = SynapseSection.fresh_over(np.arange(d))
    if ptype.has_y:
        sections["y"] = SynapseSection.fresh_over(np.arange(d))
    return Neuron(id=0, type=ptype, sections=sections)


class TestAmnesicRates:
    def test_first_firing_memorizes(self):
        assert amnesic_rates(1) == (0.0, 1.0)

    def test_candid_one_over_n(self):
        assert amnesic_rates(2) == (0.5, 0.5)
        assert amnesic_rates(10) == pytest.approx((0.9, 0.1))

    def test_zero_age_rejected(self):
        with pytest.raises(ValueError):
            amnesic_rates(0)

    def test_rates_sum_to_one(self):
        sched = AmnesicSchedule(t1=10, t2=100, c=2.0, r=1000.0)
        for n in (1, 5, 10, 50, 100, 5000):
            w1, w2 = sched.rates(n)
            assert w1 + w2 == pytest.approx(1.0)
            assert 0.0 < w2 <= 1.0

    def test_amnesic_variant_boosts_learning_rate(self):
        sched = AmnesicSchedule(t1=5, t2=50, c=2.0, r=100.0)
        assert sched.rates(100)[1] > CANDID.rates(100)[1]


class TestExcitatoryUpdate:
    def test_fresh_synapse_memorizes(self):
        n = fresh_neuron("001")
        z = np.array([0.3, 0.0, 0.0, 0.0])
        excitatory_update(n, z_prev=z, y_i=1.0)
        assert np.allclose(n.sections["z"].weights, unit_normalize(z))
        assert n.firing_age == 1

    def test_fresh_partial_input_value(self):
        # one-hot input: the memorized component equals y * normalized value
        n = fresh_neuron("001")
        excitatory_update(n, z_prev=np.array([0.0, 1.0, 0.0, 0.0]), y_i=0.5)
        assert n.sections["z"].weights[1] == pytest.approx(0.5)

    def test_two_firings_average(self):
        n = fresh_neuron("001")
        a = unit_normalize(np.array([1.0, 0.0, 0.0, 0.0]))
        b = unit_normalize(np.array([0.0, 1.0, 0.0, 0.0]))
        excitatory_update(n, z_prev=a, y_i=1.0)
        excitatory_update(n, z_prev=b, y_i=1.0)
        assert np.allclose(n.sections["z"].weights, (a + b) / 2)

    def test_sample_mean_property(self):
        # candid rates with response 1: the weights equal the running mean
        rng = np.random.default_rng(0)
        n = fresh_neuron("001", d=6)
        seen = []
        for _ in range(60):
            p = rng.uniform(0, 1, size=6)
            seen.append(unit_normalize(p))
            excitatory_update(n, z_prev=p, y_i=1.0)
            assert np.allclose(n.sections["z"].weights, np.mean(seen, axis=0), atol=1e-12)

    def test_non_firing_is_no_op(self):
        n = fresh_neuron("001")
        before = n.sections["z"].weights.copy()
        excitatory_update(n, z_prev=np.ones(4), y_i=0.0)
        assert np.array_equal(n.sections["z"].weights, before)
        assert n.firing_age == 0

    def test_age_increments_by_one(self):
        n = fresh_neuron("001")
        for k in range(1, 6):
            excitatory_update(n, z_prev=np.ones(4) + k, y_i=1.0)
            assert n.firing_age == k


class TestInhibitoryUpdate:
    def test_owner_fired_is_no_op(self):
        neg = NegativeNeuron(owner=0)
        neg.add_sources([0, 1])
        inhibitory_update(neg, np.array([1.0, 0.5]), owner_fired=True)
        assert neg.unfiring_age == 0
        assert neg.fresh.all()

    def test_fresh_component_copies_response(self):
        neg = NegativeNeuron(owner=0)
        neg.add_sources([0, 1])
        inhibitory_update(neg, np.array([0.0, 0.75]), owner_fired=False)
        assert neg.values[1] == 0.75
        assert neg.unfiring_age == 1

    def test_converges_to_neighbor_mean_response(self):
        neg = NegativeNeuron(owner=0)
        neg.add_sources([0])
        rng = np.random.default_rng(1)
        vals = []
        for _ in range(400):
            r = float(rng.uniform(0.4, 0.8))
            vals.append(r)
            inhibitory_update(neg, np.array([r]), owner_fired=False)
        assert neg.values[0] == pytest.approx(np.mean(vals), abs=1e-12)


class TestDeviations:
    def test_latency_keeps_seed(self):
        n = fresh_neuron("001")
        z = np.array([1.0, 2.0, 0.0, 0.0])
        for _ in range(19):
            excitatory_update(n, z_prev=z, y_i=1.0, n0=20)
        assert np.allclose(n.sections["z"].deviations, 1.0 / np.sqrt(12))

    def test_perfect_match_decays_toward_zero(self):
        n = fresh_neuron("001")
        z = np.array([1.0, 2.0, 0.0, 0.5])
        for _ in range(400):
            excitatory_update(n, z_prev=z, y_i=1.0, n0=20)
        assert np.all(n.sections["z"].deviations < 0.06)

    def test_sigma_nonnegative_always(self):
        rng = np.random.default_rng(2)
        n = fresh_neuron("001")
        for _ in range(200):
            excitatory_update(n, z_prev=rng.uniform(0, 1, 4), y_i=1.0, n0=5)
            assert np.all(n.sections["z"].deviations >= 0.0)

    def test_constant_mismatch_converges_to_gap(self):
        # weight pinned by alternate-sign inputs; deviation approaches the
        # steady |weight - input| gap of the alternating stream
        n = fresh_neuron("001", d=2)
        a = np.array([1.0, 0.0])
        b = np.array([0.0, 1.0])
        for i in range(2000):
            excitatory_update(n, z_prev=(a if i % 2 == 0 else b), y_i=1.0, n0=4)
        # weights sit near (0.5, 0.5); each input is one of the unit axes
        assert np.allclose(n.sections["z"].weights, [0.5, 0.5], atol=0.01)
        assert np.allclose(n.sections["z"].deviations, [0.5, 0.5], atol=0.02)

    def test_deviation_only_pass_requires_no_weight_change(self):
        n = fresh_neuron("001")
        z = np.array([1.0, 2.0, 3.0, 4.0])
        for _ in range(30):
            excitatory_update(n, z_prev=z, y_i=1.0, n0=5)
        w = n.sections["z"].weights.copy()
        update_deviations(n, z_prev=z, n0=5)
        assert np.array_equal(n.sections["z"].weights, w)
