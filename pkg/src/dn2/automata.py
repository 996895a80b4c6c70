"""Symbolic automata ground truth and the emergent-learning harness.

A finite automaton or Turing machine is taught to a network by presenting
each transition with two updates: one sets the state context, the next binds
the (symbol, state) pair to its successor.  Verification replays every pair
against the symbolic table and counts mismatches; a taught machine replays
error-free.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .growth import GrowthRateTable
from .network import DN2Network, HyperParams, XArea, ZZone, ZoneLayout

RIGHT, LEFT, STAY = "R", "L", "S"
MOVES = (RIGHT, LEFT, STAY)


@dataclass(frozen=True)
class FiniteAutomaton:
    """Total transition function over ``n_states`` x ``n_symbols``."""

    n_states: int
    n_symbols: int
    delta: dict  # (state, symbol) -> state

    def __post_init__(self):
        for q in range(self.n_states):
            for s in range(self.n_symbols):
                if (q, s) not in self.delta:
                    raise ValueError(f"transition ({q},{s}) undefined")

    def step(self, q: int, s: int) -> int:
        return self.delta[(q, s)]

    def transitions(self):
        for q in range(self.n_states):
            for s in range(self.n_symbols):
                yield q, s, self.delta[(q, s)]


@dataclass(frozen=True)
class TuringMachine:
    """Tape machine with moves right/left/stationary; missing entries halt."""

    n_states: int
    n_symbols: int  # tape alphabet size, symbol 0 is blank
    delta: dict  # (state, symbol) -> (state, write, move)

    def step(self, q: int, s: int):
        return self.delta.get((q, s))

    def run(self, tape: list, max_steps: int = 1000, q0: int = 0):
        """Symbolic execution; returns (tape, head, state, halted, trace)."""
        tape = dict(enumerate(tape))
        head = 0
        q = q0
        trace = []
        for _ in range(max_steps):
            s = tape.get(head, 0)
            out = self.step(q, s)
            if out is None:
                return self._tape_list(tape), head, q, True, trace
            qn, w, m = out
            trace.append((q, s, qn, w, m))
            tape[head] = w
            head += {RIGHT: 1, LEFT: -1, STAY: 0}[m]
            q = qn
        return self._tape_list(tape), head, q, False, trace

    @staticmethod
    def _tape_list(tape: dict) -> list:
        if not tape:
            return []
        lo, hi = min(tape), max(tape)
        return [tape.get(i, 0) for i in range(lo, hi + 1)]


@dataclass
class TeachingSchedule:
    """Order of transition visits; each visit is two network updates."""

    visits: list  # list of (state, symbol) pairs
    updates_per_transition: int = 2
    repetitions: int = 1


def random_fa(n_states: int, n_symbols: int, seed: int) -> FiniteAutomaton:
    if n_states < 1 or n_symbols < 1:
        raise ValueError("need at least one state and one symbol")
    rng = np.random.default_rng(seed)
    delta = {
        (q, s): int(rng.integers(n_states))
        for q in range(n_states)
        for s in range(n_symbols)
    }
    return FiniteAutomaton(n_states, n_symbols, delta)


def fa_network(n_states: int, n_symbols: int, n_y: int, seed: int = 0, k: int = 1) -> DN2Network:
    """A fresh network shaped for an automaton: one symbol area, one state zone.

    The screens are pinned to width 1 so that exactly the one cell agreeing
    with both the symbol and the state context can fire; that reproduces the
    single-winner condition under which transition recall is exact.
    """
    layout = ZoneLayout(
        x_areas=(XArea("symbol", n_symbols),),
        z_zones=(ZZone("state", n_states),),
        y_types=("101",),
    )
    params = HyperParams(growth=GrowthRateTable([(0, 1.0)]), k=k, n_y=n_y, k1=1, k2=1, k3=1)
    return DN2Network(layout, params, seed=seed)


def _onehot(i: int, d: int) -> np.ndarray:
    v = np.zeros(d)
    v[i] = 1.0
    return v


def teach_fa(net: DN2Network, fa: FiniteAutomaton, schedule: TeachingSchedule | None = None) -> None:
    """Present every transition once: set the state, then bind the successor.

    The first update of a visit is a context-setting step (motor weights do
    not learn from the teleported state); the second update fires the
    (symbol, state) cell and binds it to the successor state.
    """
    capacity_needed = fa.n_states * fa.n_symbols + net.params.k + 1
    if net.params.n_y < capacity_needed:
        import logging

        logging.getLogger("dn2").warning(
            "capacity %d below %d distinct pairs; recall may not be error-free",
            net.params.n_y, capacity_needed,
        )
    if schedule is None:
        schedule = TeachingSchedule(visits=[(q, s) for q, s, _ in fa.transitions()])
    first = True
    for _ in range(schedule.repetitions):
        for q, s in schedule.visits:
            if first:
                net.supervise_z({"state": q})
                first = False
            x = _onehot(s, fa.n_symbols)
            net.update(x, {"state": q}, z_learn=False)
            net.update(x, {"state": fa.step(q, s)}, z_learn=True)


def verify_fa(net: DN2Network, fa: FiniteAutomaton) -> int:
    """Replay every (state, symbol) pair on the frozen network; count mismatches."""
    was_frozen = net.frozen
    net.frozen = True
    errors = 0
    try:
        for q, s, qn in fa.transitions():
            x = _onehot(s, fa.n_symbols)
            net.update(x, {"state": q})
            net.update(x, None)
            if net.z_argmax("state") != qn:
                errors += 1
    finally:
        net.frozen = was_frozen
    return errors


# ----------------------------------------------------------- turing machines


def tm_network(tm: TuringMachine, n_y: int, seed: int = 0) -> DN2Network:
    layout = ZoneLayout(
        x_areas=(XArea("symbol", tm.n_symbols),),
        z_zones=(
            ZZone("state", tm.n_states),
            ZZone("write", tm.n_symbols),
            ZZone("move", len(MOVES)),
        ),
        y_types=("101",),
    )
    params = HyperParams(growth=GrowthRateTable([(0, 1.0)]), k=1, n_y=n_y, k1=1, k2=1, k3=1)
    return DN2Network(layout, params, seed=seed)


def teach_tm(net: DN2Network, tm: TuringMachine) -> None:
    """Two updates per tape transition, with write and move zones bound too."""
    zero_w = np.zeros(tm.n_symbols)
    zero_m = np.zeros(len(MOVES))
    first = True
    for (q, s), (qn, w, m) in sorted(tm.delta.items()):
        if first:
            net.supervise_z({"state": q, "write": zero_w, "move": zero_m})
            first = False
        x = _onehot(s, tm.n_symbols)
        net.update(x, {"state": q, "write": zero_w, "move": zero_m}, z_learn=False)
        net.update(x, {"state": qn, "write": w, "move": MOVES.index(m)}, z_learn=True)


def run_tm(net: DN2Network, tm: TuringMachine, tape: list, max_steps: int = 1000, q0: int = 0):
    """Drive the tape from the network's emergent outputs.

    Per tape step one update reads the current cell and emits state, write
    and move; the effector zones are then reset to rest.  Returns the final
    tape, a halt flag and the trace of (state, symbol, next, write, move).
    """
    was_frozen = net.frozen
    net.frozen = True
    tape_map = dict(enumerate(tape))
    head = 0
    q = q0
    trace = []
    halted = False
    zero_w = np.zeros(tm.n_symbols)
    zero_m = np.zeros(len(MOVES))
    try:
        net.supervise_z({"state": q0, "write": zero_w, "move": zero_m})
        for _ in range(max_steps):
            s = tape_map.get(head, 0)
            if tm.step(q, s) is None:
                halted = True
                break
            net.update(_onehot(s, tm.n_symbols), None)
            qn = net.z_argmax("state")
            w = net.z_argmax("write")
            m = net.z_argmax("move")
            if qn is None or w is None or m is None:
                break
            move = MOVES[m]
            trace.append((q, s, qn, w, move))
            tape_map[head] = w
            head += {RIGHT: 1, LEFT: -1, STAY: 0}[move]
            q = qn
            net.supervise_z({"write": zero_w, "move": zero_m})
    finally:
        net.frozen = was_frozen
    return TuringMachine._tape_list(tape_map), halted, trace


# ------------------------------------------------------------------ CLI body


def fa_verify_batch(states: int, symbols: int, seeds, k: int = 1, out_path=None):
    """Teach and verify one random automaton per seed; optionally emit CSV."""
    rows = []
    for seed in seeds:
        fa = random_fa(states, symbols, seed)
        net = fa_network(states, symbols, n_y=states * symbols + k + 1, seed=seed, k=k)
        teach_fa(net, fa)
        errors = verify_fa(net, fa)
        rows.append({"seed": seed, "errors": errors, "neurons_used": net.active_y_count})
    if out_path is not None:
        with open(out_path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["seed", "errors", "neurons_used"])
            w.writeheader()
            w.writerows(rows)
    return rows
