import numpy as np
import pytest

from dn2.automata import (
    FiniteAutomaton,
    TeachingSchedule,
    TuringMachine,
    fa_network,
    fa_verify_batch,
    random_fa,
    run_tm,
    teach_fa,
    teach_tm,
    tm_network,
    verify_fa,
)


class TestRandomFA:
    def test_single_state_single_symbol_self_loop(self):
        fa = random_fa(1, 1, seed=0)
        assert fa.delta == {(0, 0): 0}

    def test_same_seed_same_fa(self):
        assert random_fa(5, 4, 9).delta == random_fa(5, 4, 9).delta

    def test_totality(self):
        fa = random_fa(4, 3, seed=2)
        assert len(fa.delta) == 12
        for q in range(4):
            for s in range(3):
                assert 0 <= fa.step(q, s) < 4

    def test_partial_delta_rejected(self):
        with pytest.raises(ValueError):
            FiniteAutomaton(2, 2, {(0, 0): 1})


class TestTeachFA:
    def test_one_state_fa_uses_two_updates_per_symbol(self):
        fa = random_fa(1, 3, seed=1)
        net = fa_network(1, 3, n_y=5, seed=1)
        teach_fa(net, fa)
        assert net.age == 2 * 3

    def test_neuron_budget(self):
        fa = random_fa(3, 3, seed=4)
        net = fa_network(3, 3, n_y=11, seed=4)
        teach_fa(net, fa)
        assert net.active_y_count <= 3 * 3 + 2

    def test_reteaching_spawns_no_new_neurons(self):
        fa = random_fa(3, 2, seed=5)
        net = fa_network(3, 2, n_y=16, seed=5)
        teach_fa(net, fa)
        grown = net.active_y_count
        teach_fa(net, fa)
        assert net.active_y_count == grown

    def test_capacity_warning_logged(self, caplog):
        fa = random_fa(3, 3, seed=0)
        net = fa_network(3, 3, n_y=4, seed=0)
        with caplog.at_level("WARNING", logger="dn2"):
            teach_fa(net, fa)
        assert any("capacity" in r.message for r in caplog.records)


class TestVerifyFA:
    def test_taught_fa_error_free(self):
        for seed in range(5):
            fa = random_fa(4, 3, seed=seed)
            net = fa_network(4, 3, n_y=14, seed=seed)
            teach_fa(net, fa)
            assert verify_fa(net, fa) == 0

    def test_identity_fa_error_free(self):
        delta = {(q, s): q for q in range(4) for s in range(3)}
        fa = FiniteAutomaton(4, 3, delta)
        net = fa_network(4, 3, n_y=14, seed=3)
        teach_fa(net, fa)
        assert verify_fa(net, fa) == 0

    def test_untaught_transitions_counted_as_errors(self):
        fa = random_fa(4, 4, seed=6)
        visits = [(q, s) for q, s, _ in fa.transitions()][:8]  # half taught
        net = fa_network(4, 4, n_y=18, seed=6)
        teach_fa(net, fa, TeachingSchedule(visits=visits))
        # at least the untaught half cannot all come out right by chance
        assert verify_fa(net, fa) > 0

    def test_teaching_order_insensitive(self):
        rng = np.random.default_rng(12)
        for seed in range(5):
            fa = random_fa(4, 3, seed=seed)
            visits = [(q, s) for q, s, _ in fa.transitions()]
            rng.shuffle(visits)
            net = fa_network(4, 3, n_y=14, seed=seed)
            teach_fa(net, fa, TeachingSchedule(visits=visits))
            assert verify_fa(net, fa) == 0

    def test_verification_leaves_weights_frozen(self):
        fa = random_fa(2, 2, seed=7)
        net = fa_network(2, 2, n_y=7, seed=7)
        teach_fa(net, fa)
        w = [n.sections["x"].weights.copy() for n in net.neurons]
        verify_fa(net, fa)
        for a, b in zip(w, net.neurons):
            assert np.array_equal(a, b.sections["x"].weights)


class TestTuringMachine:
    def unary_increment(self):
        return TuringMachine(2, 2, {(0, 1): (0, 1, "R"), (0, 0): (1, 1, "S")})

    def test_symbolic_run(self):
        tape, head, q, halted, trace = self.unary_increment().run([1, 1, 1])
        assert tape == [1, 1, 1, 1]
        assert halted

    def test_stationary_echo_leaves_tape(self):
        tm = TuringMachine(2, 3, {(0, s): (1, s, "S") for s in range(3)})
        net = tm_network(tm, n_y=12, seed=0)
        teach_tm(net, tm)
        tape, halted, _ = run_tm(net, tm, [2])
        assert tape == [2]
        assert halted

    def test_unary_increment_emergent(self):
        tm = self.unary_increment()
        net = tm_network(tm, n_y=12, seed=1)
        teach_tm(net, tm)
        tape, halted, trace = run_tm(net, tm, [1, 1, 1])
        assert tape == [1, 1, 1, 1]
        assert halted

    def test_trace_equality_random_machines(self):
        rng = np.random.default_rng(3)
        for seed in range(6):
            n_q, n_s = 3, 3
            delta = {}
            for q in range(n_q):
                for s in range(n_s):
                    if rng.uniform() < 0.85:
                        delta[(q, s)] = (int(rng.integers(n_q)), int(rng.integers(n_s)), "RLS"[rng.integers(3)])
            if not delta:
                continue
            tm = TuringMachine(n_q, n_s, delta)
            sym_tape, _, _, sym_halt, sym_trace = tm.run([1, 2, 0, 1], max_steps=40)
            net = tm_network(tm, n_y=len(delta) * 2 + 4, seed=seed)
            teach_tm(net, tm)
            tape, halted, trace = run_tm(net, tm, [1, 2, 0, 1], max_steps=40)
            assert trace == sym_trace
            if sym_halt:
                assert tape == sym_tape

    def test_step_budget_reports_unhalted(self):
        tm = TuringMachine(1, 2, {(0, s): (0, 1, "R") for s in range(2)})
        net = tm_network(tm, n_y=8, seed=2)
        teach_tm(net, tm)
        _, halted, _ = run_tm(net, tm, [0], max_steps=10)
        assert not halted


class TestBatch:
    def test_csv_emission(self, tmp_path):
        out = tmp_path / "fa.csv"
        rows = fa_verify_batch(2, 2, seeds=[0, 1], out_path=out)
        assert all(r["errors"] == 0 for r in rows)
        text = out.read_text().splitlines()
        assert text[0] == "seed,errors,neurons_used"
        assert len(text) == 3
