"""Prescreening, dynamic competition sets and top-k response scaling.

Prescreening drops neurons whose bottom-up, top-down or lateral component
match is not among the best, so a bad match in one component cannot be papered
over by good matches in the others.  Competition then ranks each surviving
neuron inside its own inhibition-derived set and scales the winners into
(0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .neuron import NegativeNeuron

DROP_NONE = "none"
DROP_TOP_DOWN = "top_down"
DROP_TOP_DOWN_LATERAL = "top_down+lateral"

# floats that should tie at the k-th largest value can differ in the last
# ulps after repeated Hebbian blends; the screen must not split such ties
RANK_TOL = 1e-9


@dataclass
class PrescreenSets:
    s_b: set
    s_t: set
    s_l: set
    s_p: set
    dropped: str = DROP_NONE


@dataclass
class CompetitionResult:
    responses: dict
    firers: set = field(default_factory=set)


def _top_k_set(scores: dict, universe: set, k: int, tol: float = RANK_TOL) -> set:
    """Ids whose score reaches the k-th largest; ids without a score pass.

    Neurons that lack the component being screened cannot be screened on it.
    """
    missing = universe - set(scores)
    present = [(i, s) for i, s in scores.items() if i in universe]
    if not present:
        return set(universe)
    values = sorted((s for _, s in present), reverse=True)
    thresh = values[min(k, len(values)) - 1] - tol
    return {i for i, s in present if s >= thresh} | missing


def prescreen(r_b: dict, r_t: dict, r_l: dict, k1: int, k2: int, k3: int, k: int) -> PrescreenSets:
    """Intersect the per-component top sets, relaxing when too few survive.

    The top-down screen is dropped first, the lateral screen second; the
    bottom-up set is never dropped, so ``s_p`` is always a subset of ``s_b``.
    """
    if min(k1, k2, k3) < k or k < 1:
        raise ValueError("need k1, k2, k3 >= k >= 1")
    universe = set(r_b) | set(r_t) | set(r_l)
    s_b = _top_k_set(r_b, universe, k1)
    s_t = _top_k_set(r_t, universe, k2)
    s_l = _top_k_set(r_l, universe, k3)
    s_p = s_b & s_t & s_l
    dropped = DROP_NONE
    if len(s_p) < k:
        dropped = DROP_TOP_DOWN
        s_p = s_b & s_l
    if len(s_p) < k:
        dropped = DROP_TOP_DOWN_LATERAL
        s_p = set(s_b)
    return PrescreenSets(s_b=s_b, s_t=s_t, s_l=s_l, s_p=s_p, dropped=dropped)


def dynamic_competition_set(neg: NegativeNeuron) -> set:
    """Sources whose inhibitory weight exceeds the mean of the whole field."""
    if neg.ids.size == 0:
        raise ValueError("negative neuron has no input field")
    mean = float(neg.values.mean())
    return set(neg.ids[neg.values - mean > 0.0].tolist())


def compete(pre_responses: dict, competition_sets: dict, k: int) -> CompetitionResult:
    """Rank each neuron inside its own set; top-k winners fire in (0, 1].

    The scale is ``(r_rank - r_(k+1)) / (r_1 - r_(k+1))`` so the rank-1 member
    of a contested set fires at exactly 1.  When the set has fewer than k+1
    members, or the denominator degenerates, the top-k fire at 1.
    """
    responses = {i: 0.0 for i in pre_responses}
    firers: set = set()

    def scale(i, ranked):
        rank = ranked.index(i)
        if rank >= k:
            return None
        if len(ranked) <= k:
            return 1.0
        r1 = pre_responses[ranked[0]]
        rk1 = pre_responses[ranked[k]]
        y = 1.0 if r1 == rk1 else (pre_responses[i] - rk1) / (r1 - rk1)
        return y if y > 0.0 else None

    sets = list(competition_sets.values())
    if sets and all(s is sets[0] for s in sets[1:]):
        # one mutual set shared by every competitor: rank once
        for i in competition_sets:
            if i not in pre_responses:
                raise KeyError(f"no pre-response for competitor {i}")
        members = (set(sets[0]) | set(competition_sets)) & set(pre_responses)
        ranked = sorted(members, key=lambda j: (-pre_responses[j], j))
        pos = {j: r for r, j in enumerate(ranked)}
        n = len(ranked)
        r1 = pre_responses[ranked[0]] if n else 0.0
        rk1 = pre_responses[ranked[k]] if n > k else None
        for i in competition_sets:
            if pos[i] >= k:
                continue
            if rk1 is None or r1 == rk1:
                y = 1.0
            else:
                y = (pre_responses[i] - rk1) / (r1 - rk1)
                if y <= 0.0:
                    continue
            responses[i] = float(y)
            firers.add(i)
        return CompetitionResult(responses=responses, firers=firers)

    for i, own in competition_sets.items():
        if i not in pre_responses:
            raise KeyError(f"no pre-response for competitor {i}")
        members = (set(own) | {i}) & set(pre_responses)
        # sort by response descending, ties broken toward the lower id
        ranked = sorted(members, key=lambda j: (-pre_responses[j], j))
        y = scale(i, ranked)
        if y is not None:
            responses[i] = float(y)
            firers.add(i)
    return CompetitionResult(responses=responses, firers=firers)


def default_prescreen_width(k: int, active_count: int, fraction: float = 0.05) -> int:
    """Default k1/k2/k3: grows with the number of active neurons."""
    return max(2 * k, int(np.ceil(fraction * active_count)), k)
