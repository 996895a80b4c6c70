"""Hebbian updates for excitatory and inhibitory weights, plus deviation tracking.

The default learning-rate schedule is candid: retention (n-1)/n and learning
1/n, which makes an always-firing neuron's weight vector the exact running
mean of its normalized inputs.  An amnesic variant that accelerates learning
for old neurons is available behind configuration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .neuron import Neuron, NegativeNeuron, SynapseSection
from .normalize import normalize_with_volume, unit_normalize

N0_DEFAULT = 20  # deviation waiting latency, in firings of the synapse


@dataclass(frozen=True)
class AmnesicSchedule:
    """Retention/learning rate pair as a function of age, with w1 + w2 == 1.

    With ``t1 = t2 = inf`` (the default) the schedule is candid: w2 = 1/n.
    Finite breakpoints add the amnesic boost ``mu(n)`` so that recent inputs
    weigh more than a plain average would give them.
    """

    t1: float = np.inf
    t2: float = np.inf
    c: float = 2.0
    r: float = 10000.0

    def rates(self, n: int) -> tuple[float, float]:
        if n < 1:
            raise ValueError("age must be >= 1")
        if n <= self.t1:
            mu = 0.0
        elif n <= self.t2:
            mu = self.c * (n - self.t1) / (self.t2 - self.t1)
        else:
            mu = self.c + (n - self.t2) / self.r
        w2 = min(1.0, (1.0 + mu) / n)
        return 1.0 - w2, w2

    def learning_rates(self, ages: np.ndarray) -> np.ndarray:
        """Vectorized w2 over an array of ages >= 1."""
        ages = np.asarray(ages, dtype=np.float64)
        if not np.isfinite(self.t1):
            return np.minimum(1.0, 1.0 / ages)
        mu = np.where(
            ages <= self.t1,
            0.0,
            np.where(
                ages <= self.t2,
                self.c * (ages - self.t1) / (self.t2 - self.t1),
                self.c + (ages - self.t2) / self.r,
            ),
        )
        return np.minimum(1.0, (1.0 + mu) / ages)


CANDID = AmnesicSchedule()


def amnesic_rates(n: int, schedule: AmnesicSchedule = CANDID) -> tuple[float, float]:
    """Retention and learning rates at firing age ``n`` (candid: w2 = 1/n)."""
    return schedule.rates(n)


def _section_input(sec: SynapseSection, source: np.ndarray, volume_state, update_volume: bool, span: np.ndarray | None = None):
    """Normalized input over a span of synapses, aligned with the section arrays.

    ``span`` defaults to the active mask.  Returns (per-synapse normalized
    components with zeros outside the span, the span mask, volume component
    or None).
    """
    mask = sec.active_mask() if span is None else span
    p = np.zeros(sec.ids.size)
    vol = None
    src = np.asarray(source, dtype=np.float64)
    slice_ = src[sec.ids[mask]] * sec.factors[mask]
    if sec.has_volume:
        aug, _ = normalize_with_volume(slice_, volume_state, update_state=update_volume)
        p[mask] = aug[:-1]
        vol = float(aug[-1])
    else:
        p[mask] = unit_normalize(slice_)
    return p, mask, vol


def excitatory_update(
    neuron: Neuron,
    x: np.ndarray | None = None,
    y_prev: np.ndarray | None = None,
    z_prev: np.ndarray | None = None,
    y_i: float = 1.0,
    schedule: AmnesicSchedule = CANDID,
    n0: int = N0_DEFAULT,
) -> None:
    """Hebbian update of a firing neuron's weights, then of its deviations.

    Non-firing neurons (y_i == 0) are left untouched.  Fresh synapses
    memorize ``y_i * p`` outright; established ones blend with the
    age-dependent rates.  Buffered synapses keep their weight but still track
    deviations.
    """
    if y_i <= 0.0:
        return
    neuron.firing_age += 1
    n_i = neuron.firing_age
    w1, w2 = schedule.rates(n_i)
    sources = {"x": x, "y": y_prev, "z": z_prev}
    for key, sec in neuron.sections.items():
        p, act, vol = _section_input(sec, sources[key], neuron.volume_state, update_volume=True)
        upd = act.copy()
        fresh_upd = upd & sec.fresh
        old_upd = upd & ~sec.fresh
        sec.weights[fresh_upd] = y_i * p[fresh_upd]
        sec.spine_ages[fresh_upd] = n_i - 1
        sec.fresh[fresh_upd] = False
        sec.weights[old_upd] = w1 * sec.weights[old_upd] + w2 * y_i * p[old_upd]
        if sec.has_volume and vol is not None:
            if sec.volume_fresh:
                sec.volume_weight = y_i * vol
                sec.volume_fresh = False
            else:
                sec.volume_weight = w1 * sec.volume_weight + w2 * y_i * vol
        p_dev = p
        tracked = sec.status <= 1
        if np.any(tracked & ~act):
            p_dev, _, _ = _section_input(sec, sources[key], neuron.volume_state, update_volume=False, span=tracked)
        _update_section_deviations(sec, p_dev, n_i, schedule, n0)


def _update_section_deviations(sec: SynapseSection, p: np.ndarray, n_i: int, schedule: AmnesicSchedule, n0: int) -> None:
    """Amnesic average of the per-synapse |weight - input| mismatch.

    Synapses younger than the waiting latency keep the seed deviation until
    their weight estimate has matured.  Tracked-but-inactive synapses keep
    following the input so they can recover through the buffer zone.
    """
    tracked = sec.status <= 1  # active or buffered
    dn = n_i - sec.spine_ages
    mature = tracked & (dn > n0) & ~sec.fresh
    if not np.any(mature):
        return
    w2 = schedule.learning_rates(dn[mature])
    w1 = 1.0 - w2
    dev = np.abs(sec.weights[mature] - p[mature])
    sec.deviations[mature] = w1 * sec.deviations[mature] + w2 * dev


def update_deviations(
    neuron: Neuron,
    x: np.ndarray | None = None,
    y_prev: np.ndarray | None = None,
    z_prev: np.ndarray | None = None,
    schedule: AmnesicSchedule = CANDID,
    n0: int = N0_DEFAULT,
) -> None:
    """Deviation-only pass for a neuron that fired this step."""
    sources = {"x": x, "y": y_prev, "z": z_prev}
    for key, sec in neuron.sections.items():
        tracked = sec.status <= 1
        p, _, _ = _section_input(sec, sources[key], neuron.volume_state, update_volume=False, span=tracked)
        _update_section_deviations(sec, p, neuron.firing_age, schedule, n0)


def inhibitory_update(
    neg: NegativeNeuron,
    field_responses: np.ndarray,
    owner_fired: bool,
    schedule: AmnesicSchedule = CANDID,
) -> None:
    """Update the negative neuron from the current responses of its field.

    Fires exactly when the owner does not: fresh components copy the
    neighbor's response, established ones take the amnesic blend.
    """
    if owner_fired:
        return
    neg.unfiring_age += 1
    w1, w2 = schedule.rates(neg.unfiring_age)
    field = np.asarray(field_responses, dtype=np.float64)
    p = field[neg.ids]
    fresh = neg.fresh.copy()
    neg.values[fresh] = p[fresh]
    neg.fresh[fresh] = False
    old = ~fresh
    neg.values[old] = w1 * neg.values[old] + w2 * p[old]
