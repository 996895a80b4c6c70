"""Neuron recruitment: the almost-perfect-match gate and splitting (mitosis).

A zone recruits a new neuron by cloning the current best matcher whenever the
best match falls below the age-dependent threshold m(t) and the zone still has
capacity.  The clone's ages are zeroed and it is supervised to fire at 1, so
its first Hebbian update memorizes the triggering input outright.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from .learning import CANDID, excitatory_update
from .neuron import DEVIATION_SEED, Neuron, NegativeNeuron

# Floor below a perfect match.  The literal reading of "machine zero" would be
# one float64 epsilon, but a unit-vector self-match accumulates O(d*eps)
# rounding, so re-presenting a memorized input could spuriously re-split.
# 1e-9 dominates that rounding by orders of magnitude while staying far above
# any genuinely distinct pattern.
THETA_DEFAULT = 1e-9

SPLIT_OFFSET_MULTIPLIER = 5.0


@dataclass
class GrowthRateTable:
    """Piecewise-constant growth rate alpha(t) from a (start_age, rate) table."""

    steps: list = field(default_factory=lambda: [(0, 1.0)])

    def __post_init__(self):
        self.steps = sorted((int(a), float(r)) for a, r in self.steps)
        if not self.steps or self.steps[0][0] != 0:
            raise ValueError("table must define a rate from age 0")
        for _, r in self.steps:
            if not (0.0 < r <= 1.0):
                raise ValueError("growth rates must lie in (0, 1]")

    def rate(self, t: int) -> float:
        out = self.steps[0][1]
        for age, r in self.steps:
            if t >= age:
                out = r
        return out


def almost_perfect_match(t: int, table: GrowthRateTable, theta: float = THETA_DEFAULT) -> float:
    """Recruitment threshold m(t) = alpha(t) * (1 - theta)."""
    return table.rate(t) * (1.0 - theta)


def split_neuron(
    winner: Neuron,
    winner_negative: NegativeNeuron | None,
    new_id: int,
    x: np.ndarray | None = None,
    y_prev: np.ndarray | None = None,
    z_prev: np.ndarray | None = None,
    location_jitter: np.ndarray | None = None,
    theta: float = THETA_DEFAULT,
    schedule=CANDID,
) -> tuple[Neuron, NegativeNeuron | None]:
    """Clone the winner, zero the ages and memorize the current input.

    The clone copies the winner's synaptic structure and vectors (negative
    vectors included), then one forced update at response 1 overwrites the
    weights with the normalized input slices.  The clone settles a hair away
    from the winner; an optional jitter separates the pair visibly.
    """
    clone = copy.deepcopy(winner)
    clone.id = new_id
    clone.firing_age = 0
    for sec in clone.sections.values():
        sec.spine_ages[:] = 0
        sec.deviations[:] = DEVIATION_SEED / sqrt(12.0)
    offset = np.zeros(3)
    offset[1] = SPLIT_OFFSET_MULTIPLIER * theta
    if location_jitter is not None:
        offset = offset + location_jitter
    clone.location = winner.location + offset

    neg = None
    if winner_negative is not None:
        neg = NegativeNeuron(
            owner=new_id,
            ids=winner_negative.ids.copy(),
            values=winner_negative.values.copy(),
            fresh=winner_negative.fresh.copy(),
            unfiring_age=0,
        )

    excitatory_update(clone, x=x, y_prev=y_prev, z_prev=z_prev, y_i=1.0, schedule=schedule)
    return clone, neg


def should_split(active_count: int, cap: int, winner_pre_response: float, t: int, table: GrowthRateTable, theta: float = THETA_DEFAULT) -> bool:
    return active_count < cap and winner_pre_response < almost_perfect_match(t, table, theta)
