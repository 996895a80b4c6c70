"""Neuron record: per-source weight sections, inhibitory companion, deviations.

A hidden neuron owns up to three synapse sections (bottom-up from the sensory
zone, lateral from its own zone, top-down from the motor zone) selected by its
patterning type.  Each synapse carries a weight, a trim factor, an activity
flag, a spine age and a deviation estimate.  The bottom-up section also owns
the neuron's running volume statistics and one extra volume weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .normalize import VolumeState, normalize_with_volume, normalized_dot, unit_normalize

ACTIVE = 0
BUFFERED = 1

DEVIATION_SEED = 1.0  # delta: nominal range of a normalized component

VALID_TYPE_CODES = ("001", "010", "011", "100", "101", "110", "111")


@dataclass(frozen=True)
class PatterningType:
    """Initial wiring of a hidden neuron, encoded as bits ``s_x s_y s_z``.

    ``"100"`` wires bottom-up only, ``"101"`` bottom-up plus top-down,
    ``"111"`` all three sources.
    """

    code: str

    def __post_init__(self):
        if self.code not in VALID_TYPE_CODES:
            raise ValueError(f"invalid patterning code {self.code!r}")

    @property
    def has_x(self) -> bool:
        return self.code[0] == "1"

    @property
    def has_y(self) -> bool:
        return self.code[1] == "1"

    @property
    def has_z(self) -> bool:
        return self.code[2] == "1"


@dataclass
class SynapseSection:
    """Synapses of one neuron drawn from one source zone.

    All arrays are aligned with ``ids``.  ``fresh`` marks synapses that have
    never been through a Hebbian update; their first update memorizes the
    input component outright.  Buffered synapses keep their weights and
    deviation statistics but are excluded from pre-responses.
    """

    ids: np.ndarray
    weights: np.ndarray
    factors: np.ndarray
    status: np.ndarray
    spine_ages: np.ndarray
    deviations: np.ndarray
    fresh: np.ndarray
    has_volume: bool = False
    volume_weight: float = 0.0
    volume_fresh: bool = True

    @classmethod
    def empty(cls, has_volume: bool = False) -> "SynapseSection":
        z = np.zeros(0)
        return cls(
            ids=np.zeros(0, dtype=np.int64),
            weights=z.copy(),
            factors=z.copy(),
            status=np.zeros(0, dtype=np.int8),
            spine_ages=np.zeros(0, dtype=np.int64),
            deviations=z.copy(),
            fresh=np.zeros(0, dtype=bool),
            has_volume=has_volume,
        )

    @classmethod
    def fresh_over(cls, ids, has_volume: bool = False, deviation_seed: float = DEVIATION_SEED) -> "SynapseSection":
        ids = np.asarray(ids, dtype=np.int64)
        n = ids.size
        return cls(
            ids=ids,
            weights=np.zeros(n),
            factors=np.ones(n),
            status=np.zeros(n, dtype=np.int8),
            spine_ages=np.zeros(n, dtype=np.int64),
            deviations=np.full(n, deviation_seed / np.sqrt(12.0)),
            fresh=np.ones(n, dtype=bool),
            has_volume=has_volume,
        )

    def active_mask(self) -> np.ndarray:
        return self.status == ACTIVE

    def add_sources(self, new_ids, owner_age: int, deviation_seed: float = DEVIATION_SEED) -> None:
        """Append fresh synapses for sources that appeared after this neuron."""
        new_ids = np.asarray(new_ids, dtype=np.int64)
        if new_ids.size == 0:
            return
        n = new_ids.size
        self.ids = np.concatenate([self.ids, new_ids])
        self.weights = np.concatenate([self.weights, np.zeros(n)])
        self.factors = np.concatenate([self.factors, np.ones(n)])
        self.status = np.concatenate([self.status, np.zeros(n, dtype=np.int8)])
        self.spine_ages = np.concatenate([self.spine_ages, np.full(n, owner_age, dtype=np.int64)])
        self.deviations = np.concatenate([self.deviations, np.full(n, deviation_seed / np.sqrt(12.0))])
        self.fresh = np.concatenate([self.fresh, np.ones(n, dtype=bool)])


@dataclass
class ComponentPreResponses:
    """Per-section normalized match scores; absent sections are ``None``."""

    r_b: float | None = None
    r_t: float | None = None
    r_l: float | None = None

    def present(self) -> list[float]:
        return [r for r in (self.r_b, self.r_t, self.r_l) if r is not None]


@dataclass
class NegativeNeuron:
    """Inhibitory companion tracking which neighbors fire while the owner is silent."""

    owner: int
    ids: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    fresh: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    unfiring_age: int = 0

    def add_sources(self, new_ids) -> None:
        new_ids = np.asarray(new_ids, dtype=np.int64)
        if new_ids.size == 0:
            return
        self.ids = np.concatenate([self.ids, new_ids])
        self.values = np.concatenate([self.values, np.zeros(new_ids.size)])
        self.fresh = np.concatenate([self.fresh, np.ones(new_ids.size, dtype=bool)])


@dataclass
class Neuron:
    """One hidden neuron with sections selected by its patterning type."""

    id: int
    type: PatterningType
    sections: dict
    firing_age: int = 0
    location: np.ndarray = field(default_factory=lambda: np.zeros(3))
    volume_state: VolumeState = field(default_factory=VolumeState)

    def __post_init__(self):
        want = {"x": self.type.has_x, "y": self.type.has_y, "z": self.type.has_z}
        have = set(self.sections)
        expect = {k for k, v in want.items() if v}
        if have != expect:
            raise ValueError(f"sections {sorted(have)} do not match type {self.type.code}")

    def section(self, key: str) -> SynapseSection | None:
        return self.sections.get(key)

    def _section_slice(self, sec: SynapseSection, source: np.ndarray, present: np.ndarray | None):
        """Active weights and matching input slice, trim factors applied to both."""
        m = sec.active_mask()
        if present is not None:
            m = m & present[sec.ids]
        ids = sec.ids[m]
        f = sec.factors[m]
        return sec.weights[m] * f, np.asarray(source, dtype=np.float64)[ids] * f

    def component_pre_responses(
        self,
        x: np.ndarray | None = None,
        y_prev: np.ndarray | None = None,
        z_prev: np.ndarray | None = None,
        update_volume: bool = True,
        missing: dict | None = None,
    ) -> ComponentPreResponses:
        """Normalized per-section match against the current zone vectors.

        ``missing`` optionally maps ``'x'``/``'y'``/``'z'`` to boolean
        presence masks; masked-out dimensions are dropped from both the
        weight and the input slice before normalization.
        """
        missing = missing or {}
        out = ComponentPreResponses()
        if self.type.has_x:
            sec = self.sections["x"]
            w, p = self._section_slice(sec, x, missing.get("x"))
            if p.size == 0:
                out.r_b = 0.0
            else:
                p_aug, _ = normalize_with_volume(p, self.volume_state, update_state=update_volume)
                w_aug = np.append(w, sec.volume_weight)
                out.r_b = normalized_dot(w_aug, p_aug)
        if self.type.has_y:
            w, p = self._section_slice(self.sections["y"], y_prev, missing.get("y"))
            out.r_l = normalized_dot(w, p) if p.size else 0.0
        if self.type.has_z:
            w, p = self._section_slice(self.sections["z"], z_prev, missing.get("z"))
            out.r_t = normalized_dot(w, p) if p.size else 0.0
        return out

    def total_pre_response(self, components: ComponentPreResponses) -> float:
        """Mean of the present per-section matches; the maximum is 1 for every type."""
        parts = components.present()
        if not parts:
            return 0.0
        return float(np.mean(parts))


def init_from_input(
    neuron_id: int,
    ptype: PatterningType,
    x_slice: np.ndarray | None = None,
    y_slice: np.ndarray | None = None,
    z_slice: np.ndarray | None = None,
    location: np.ndarray | None = None,
    volume_state: VolumeState | None = None,
    deviation_seed: float = DEVIATION_SEED,
) -> Neuron:
    """Create a neuron that memorizes the given input slices perfectly.

    The weights equal the normalized slices (one forced Hebbian update at
    response 1), so the new neuron's total pre-response against the same
    input is 1 and its firing age is 1.
    """
    sections: dict[str, SynapseSection] = {}
    vstate = volume_state.copy() if volume_state is not None else VolumeState()
    if ptype.has_x:
        if x_slice is None:
            raise ValueError("type requires a bottom-up slice")
        x_slice = np.asarray(x_slice, dtype=np.float64)
        sec = SynapseSection.fresh_over(np.arange(x_slice.size), has_volume=True, deviation_seed=deviation_seed)
        p_aug, vstate = normalize_with_volume(x_slice, vstate)
        sec.weights = p_aug[:-1].copy()
        sec.volume_weight = float(p_aug[-1])
        sec.volume_fresh = False
        sec.fresh[:] = False
        sections["x"] = sec
    if ptype.has_y:
        if y_slice is None:
            raise ValueError("type requires a lateral slice")
        y_slice = np.asarray(y_slice, dtype=np.float64)
        sec = SynapseSection.fresh_over(np.arange(y_slice.size), deviation_seed=deviation_seed)
        sec.weights = unit_normalize(y_slice)
        sec.fresh[:] = False
        sections["y"] = sec
    if ptype.has_z:
        if z_slice is None:
            raise ValueError("type requires a top-down slice")
        z_slice = np.asarray(z_slice, dtype=np.float64)
        sec = SynapseSection.fresh_over(np.arange(z_slice.size), deviation_seed=deviation_seed)
        sec.weights = unit_normalize(z_slice)
        sec.fresh[:] = False
        sections["z"] = sec
    loc = np.zeros(3) if location is None else np.asarray(location, dtype=np.float64).copy()
    return Neuron(id=neuron_id, type=ptype, sections=sections, firing_age=1, location=loc, volume_state=vstate)
