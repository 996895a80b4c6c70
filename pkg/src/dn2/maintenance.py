"""Synaptic maintenance: deviation ratios, trimming, buffer zone, growth.

Each maintained synapse carries an amnesic estimate of how far its weight sits
from its input.  Synapses whose deviation ratio is high relative to the
neuron's mean get their trim factor ramped down to zero; the least-bad of the
cut ones wait in a buffer zone where they keep tracking deviations and may
reconnect later.  Every maintenance event may also trial a new synapse found
through the glial neighborhood of the most stable source.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, sqrt

import numpy as np

from .neuron import ACTIVE, BUFFERED, DEVIATION_SEED, Neuron, SynapseSection

CUT = 2  # internal status: removed from tracking by buffer replacement


class MaintenanceConfigError(ValueError):
    pass


@dataclass
class MaintenanceParams:
    beta_s: float = 1.0
    beta_b: float = 2.0
    n_u: int = 1000  # max active synapses per neuron
    n_0: int = 20  # maintenance cadence and deviation latency, in firings
    buffer_fraction: float = 0.2
    deviation_seed: float = DEVIATION_SEED

    def __post_init__(self):
        if self.beta_s >= self.beta_b:
            raise MaintenanceConfigError("beta_s must be < beta_b")
        if self.n_u < 1:
            raise MaintenanceConfigError("n_u must be >= 1")


def synaptogenic_factor(r: float, params: MaintenanceParams) -> float:
    """Trim multiplier for a deviation ratio: 1 keeps, 0 cuts, linear between."""
    if r < 0:
        raise ValueError("ratio must be nonnegative")
    if r < params.beta_s:
        return 1.0
    if r <= params.beta_b:
        return (params.beta_b - r) / (params.beta_b - params.beta_s)
    return 0.0


def _renormalize_section(sec: SynapseSection) -> None:
    """Epsilon-mean (sensory only) and unit-length normalization of the weights.

    Applied over the active span so that trimming does not leave the weight
    vector off-center or off-scale relative to the inputs it will now see.
    """
    act = sec.status == ACTIVE
    w = sec.weights[act] * sec.factors[act]
    if w.size == 0:
        return
    if sec.has_volume:
        w = w - w.mean()
        full = np.append(w, sec.volume_weight)
        n = float(np.linalg.norm(full))
        if n > 10 * np.finfo(float).eps:
            w = w / n
            sec.volume_weight = sec.volume_weight / n
    else:
        n = float(np.linalg.norm(w))
        if n > 10 * np.finfo(float).eps:
            w = w / n
    nz = sec.factors[act] > 0
    out = sec.weights[act]
    out[nz] = w[nz] / sec.factors[act][nz]
    sec.weights[act] = out


def neuron_deviation_stats(neuron: Neuron) -> tuple[float, dict]:
    """Mean deviation pooled over all tracked synapses, and per-section ratios."""
    devs = []
    for sec in neuron.sections.values():
        tracked = sec.status <= BUFFERED
        devs.append(sec.deviations[tracked])
    all_devs = np.concatenate(devs) if devs else np.zeros(0)
    if all_devs.size == 0 or all_devs.mean() <= 0:
        return 0.0, {k: np.ones(s.ids.size) for k, s in neuron.sections.items()}
    bar = float(all_devs.mean())
    ratios = {}
    for key, sec in neuron.sections.items():
        r = np.full(sec.ids.size, np.inf)
        tracked = sec.status <= BUFFERED
        r[tracked] = sec.deviations[tracked] / bar
        ratios[key] = r
    return bar, ratios


def post_synaptic_maintain(
    neuron: Neuron,
    params: MaintenanceParams,
    glia_index=None,
    warn=None,
) -> None:
    """Trim, buffer and (via glia) grow the incoming synapses of one neuron.

    The weight vector is renormalized before and after trimming.  If more
    than ``n_u`` synapses would stay active, the factor cut is tightened to
    keep exactly the ``n_u`` most stable ones.  ``glia_index`` is a callable
    ``source_id -> nearest_neighbor_id`` used for the growth trial; without
    it the growth step is skipped.
    """
    total_tracked = sum(int((sec.status <= BUFFERED).sum()) for sec in neuron.sections.values())
    if total_tracked == 0:
        return

    for sec in neuron.sections.values():
        _renormalize_section(sec)

    bar, ratios = neuron_deviation_stats(neuron)
    if bar <= 0:
        return

    # factors from the ratio ramp
    entries = []  # (ratio, section key, index)
    for key, sec in neuron.sections.items():
        tracked = sec.status <= BUFFERED
        for idx in np.nonzero(tracked)[0]:
            entries.append((float(ratios[key][idx]), key, int(idx)))
    factors = {(k, i): synaptogenic_factor(r, params) for r, k, i in entries}

    # tighten to the resource cap: keep only the n_u most stable active
    keep_active = [(r, k, i) for r, k, i in entries if factors[(k, i)] > 0]
    if len(keep_active) > params.n_u:
        keep_active.sort(key=lambda t: (t[0], t[1], t[2]))
        for r, k, i in keep_active[params.n_u :]:
            factors[(k, i)] = 0.0
        keep_active = keep_active[: params.n_u]

    # apply factors; collect the cut ones for buffering
    zeroed = []
    for r, k, i in entries:
        sec = neuron.sections[k]
        f = factors[(k, i)]
        came_back = f > 0 and sec.status[i] == BUFFERED
        sec.factors[i] = f
        if f > 0:
            sec.status[i] = ACTIVE
            if came_back:
                # reconnection: new spine, deviation starts over
                sec.spine_ages[i] = neuron.firing_age
                sec.deviations[i] = params.deviation_seed / sqrt(12.0)
        else:
            zeroed.append((r, k, i))

    n_s = len(keep_active)
    quota = ceil(params.buffer_fraction * n_s)
    zeroed.sort(key=lambda t: (t[0], t[1], t[2]))
    for pos, (r, k, i) in enumerate(zeroed):
        neuron.sections[k].status[i] = BUFFERED if pos < quota else CUT

    # growth trial: most stable source's nearest neighbor enters the buffer
    if glia_index is None:
        if warn is not None:
            warn("no glia index: skipping synapse growth step")
    else:
        _growth_trial(neuron, params, glia_index)

    for sec in neuron.sections.values():
        _renormalize_section(sec)


def _growth_trial(neuron: Neuron, params: MaintenanceParams, glia_index) -> None:
    """Admit the nearest neighbor of the most stable source into the buffer."""
    best = None
    for key, sec in neuron.sections.items():
        act = sec.status == ACTIVE
        if not np.any(act):
            continue
        idx = int(np.nonzero(act)[0][np.argmin(sec.deviations[act])])
        dev = float(sec.deviations[idx])
        if best is None or dev < best[0]:
            best = (dev, key, idx)
    if best is None:
        return
    _, key, idx = best
    sec = neuron.sections[key]
    neighbor = glia_index(key, int(sec.ids[idx]))
    if neighbor is None:
        return
    pos = np.nonzero(sec.ids == neighbor)[0]
    _, ratios = neuron_deviation_stats(neuron)
    buffered = np.nonzero(sec.status == BUFFERED)[0]
    if pos.size:
        i = int(pos[0])
        if sec.status[i] != ACTIVE:
            sec.status[i] = BUFFERED
            sec.spine_ages[i] = neuron.firing_age
            sec.deviations[i] = params.deviation_seed / sqrt(12.0)
            sec.fresh[i] = True
    else:
        sec.add_sources([neighbor], neuron.firing_age, params.deviation_seed)
        sec.status[-1] = BUFFERED
    # the worst buffered synapse makes room
    if buffered.size:
        worst = int(buffered[np.argmax(ratios[key][buffered])])
        if sec.ids[worst] != neighbor:
            sec.status[worst] = CUT


def pre_synaptic_maintain(source_key: str, source_id: int, partners: list, params: MaintenanceParams) -> None:
    """Mirror maintenance over the outgoing synapses of one source neuron.

    ``partners`` is a list of post-synaptic neurons holding a synapse from
    ``source_id`` in their ``source_key`` section.  Both ends must agree: a
    synapse is active only when active on both ends, and a buffered end drags
    the other end into the buffer too.
    """
    hits = []  # (partner position, neuron, index)
    devs = []
    for p, post in enumerate(partners):
        sec = post.sections.get(source_key)
        if sec is None:
            continue
        pos = np.nonzero(sec.ids == source_id)[0]
        if pos.size == 0:
            continue
        i = int(pos[0])
        if sec.status[i] > BUFFERED:
            continue
        hits.append((p, post, i))
        devs.append(float(sec.deviations[i]))
    if not hits:
        return []
    bar = float(np.mean(devs))
    if bar <= 0:
        return []
    changed = []
    for (p, post, i), dev in zip(hits, devs):
        sec = post.sections[source_key]
        f = synaptogenic_factor(dev / bar, params)
        if f < sec.factors[i]:
            sec.factors[i] = f
            changed.append(p)
        if f <= 0 and sec.status[i] == ACTIVE:
            sec.status[i] = BUFFERED
            if p not in changed:
                changed.append(p)
    return changed
