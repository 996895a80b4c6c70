"""Three-zone network assembly and the per-step update loop.

One ``update`` presents a sensory vector and optional motor supervision, runs
the hidden zone (prescreen, dynamic competition, possible recruitment,
Hebbian learning), then the motor zone over the fresh hidden firing pattern,
and finally replaces both response snapshots atomically.  The network never
stores inputs; everything it knows lives in weights, ages, deviations,
inhibition statistics and locations.  Only the sensory port and the motor
supervision port are writable from outside.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .competition import compete, default_prescreen_width, prescreen
from .growth import GrowthRateTable, THETA_DEFAULT, almost_perfect_match, split_neuron
from .learning import CANDID, AmnesicSchedule, excitatory_update
from .maintenance import CUT, MaintenanceParams, post_synaptic_maintain, pre_synaptic_maintain
from .neuron import ACTIVE, BUFFERED, Neuron, PatterningType, SynapseSection
from .normalize import EPS_DEFAULT, VolumeState, normalized_dot, unit_normalize
from .placement import GlialGrid, Skull, init_glia, nearest_neighbor_via_glia, place_new_neuron, update_locations

log = logging.getLogger("dn2")


class LayoutError(ValueError):
    pass


class SupervisionError(ValueError):
    pass


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class XArea:
    name: str
    dim: int


@dataclass(frozen=True)
class ZZone:
    """One motor concept zone: a mutual competition group of ``size`` neurons.

    ``none_index`` flags the neuron that stands for "none of the above" where
    the zone declares one.  ``lateral`` additionally wires the zone's neurons
    to the whole previous motor vector.
    """

    name: str
    size: int
    none_index: int | None = None
    lateral: bool = False
    k: int = 1


@dataclass(frozen=True)
class ZoneLayout:
    x_areas: tuple
    z_zones: tuple
    y_types: tuple = ("101",)

    def __post_init__(self):
        names = [a.name for a in self.x_areas] + [z.name for z in self.z_zones]
        if len(set(names)) != len(names):
            raise LayoutError("duplicate area/zone names")
        if not self.x_areas:
            raise LayoutError("need at least one sensory area")
        if not self.z_zones:
            raise LayoutError("need at least one motor zone")
        for a in self.x_areas:
            if a.dim < 1:
                raise LayoutError(f"sensory area {a.name!r} has dimension {a.dim}")
        for z in self.z_zones:
            if z.size < 1:
                raise LayoutError(f"motor zone {z.name!r} has size {z.size}")
            if z.none_index is not None and not (0 <= z.none_index < z.size):
                raise LayoutError(f"none neuron out of range in zone {z.name!r}")
        for t in self.y_types:
            PatterningType(t)

    @property
    def x_dim(self) -> int:
        return sum(a.dim for a in self.x_areas)

    @property
    def z_dim(self) -> int:
        return sum(z.size for z in self.z_zones)

    def x_slice(self, name: str) -> slice:
        off = 0
        for a in self.x_areas:
            if a.name == name:
                return slice(off, off + a.dim)
            off += a.dim
        raise KeyError(name)

    def z_slice(self, name: str) -> slice:
        off = 0
        for z in self.z_zones:
            if z.name == name:
                return slice(off, off + z.size)
            off += z.size
        raise KeyError(name)


@dataclass
class PlacementParams:
    skull: Skull = field(default_factory=Skull)
    n_g: int = 27
    k_pull: int = 4
    gamma: float = 0.1
    n_dn: int = 50
    literal_update: bool = True
    radius_fraction: float = 0.05
    split_jitter: float = 0.01


@dataclass
class HyperParams:
    """Hand-picked limits and schedules, fixed for the network's lifetime."""

    growth: GrowthRateTable = field(default_factory=GrowthRateTable)
    k: int = 1
    l_in: int = 1000
    l_out: int = 1000
    n_y: int = 64
    n_z: int = 1024
    k1: int | None = None
    k2: int | None = None
    k3: int | None = None
    prescreen_fraction: float = 0.05
    maintenance: MaintenanceParams = field(default_factory=MaintenanceParams)
    placement: PlacementParams = field(default_factory=PlacementParams)
    schedule: AmnesicSchedule = CANDID
    theta: float = THETA_DEFAULT
    volume_alpha: float = 0.2
    hormone: dict = field(default_factory=dict)  # type code -> first age allowed to split

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.n_y < self.k + 1:
            raise ValueError("n_y must allow the k+1 initial neurons")
        self.maintenance.n_u = min(self.maintenance.n_u, self.l_in)


class _SectionCache:
    """Stacked per-neuron views of one synapse section kind.

    Everything needed to evaluate factor-trimmed normalized matches without
    touching the per-neuron records: a response is
    ``(w.f) . (x.f restricted to active) / (|w.f| |x.f|)`` with the sensory
    variant additionally mean-centered and volume-augmented.
    """

    def __init__(self, rows: int, dim: int):
        self.w_eff = np.zeros((rows, dim))  # w * f, zero where inactive
        self.w_eff_f = np.zeros((rows, dim))  # w * f^2
        self.f = np.zeros((rows, dim))  # f where active, else 0
        self.f2 = np.zeros((rows, dim))
        self.w_eff_sum = np.zeros(rows)
        self.count = np.zeros(rows)
        self.norm = np.zeros(rows)

    def refresh_row(self, i: int, sec) -> None:
        act = sec.status == ACTIVE
        ids = sec.ids[act]
        f = sec.factors[act]
        w = sec.weights[act] * f
        for arr in (self.w_eff, self.w_eff_f, self.f, self.f2):
            arr[i] = 0.0
        self.w_eff[i, ids] = w
        self.w_eff_f[i, ids] = w * f
        self.f[i, ids] = f
        self.f2[i, ids] = f * f
        self.w_eff_sum[i] = w.sum()
        self.count[i] = ids.size
        self.norm[i] = float(np.linalg.norm(w))

    def centered_stats(self, x: np.ndarray, rows, present: np.ndarray | None):
        """Per-row mean, centered norm and centered weight-input dot.

        ``rows`` may be None for every row (avoids copying the matrices).
        ``present`` optionally masks out declared-missing input dimensions
        from every span.
        """
        if rows is None:
            rows = slice(None)
        if present is None:
            fm, fm2, wef, wsum, cnt = (
                self.f[rows], self.f2[rows], self.w_eff_f[rows], self.w_eff_sum[rows], self.count[rows],
            )
        else:
            keep = present.astype(np.float64)
            fm = self.f[rows] * keep
            fm2 = self.f2[rows] * keep
            wef = self.w_eff_f[rows] * keep
            wsum = (self.w_eff[rows] * keep).sum(axis=1)
            cnt = (fm > 0).sum(axis=1).astype(np.float64)
        sx = fm @ x
        sxx = fm2 @ (x * x)
        mean = np.divide(sx, cnt, out=np.zeros_like(sx), where=cnt > 0)
        l2 = np.maximum(sxx - cnt * mean * mean, 0.0)
        dotc = wef @ x - mean * wsum
        return mean, np.sqrt(l2), dotc

    def plain_stats(self, z: np.ndarray, rows, present: np.ndarray | None):
        """Per-row input-slice norm and weight-input dot (no centering)."""
        if rows is None:
            rows = slice(None)
        if present is None:
            fm2, wef = self.f2[rows], self.w_eff_f[rows]
        else:
            keep = present.astype(np.float64)
            fm2 = self.f2[rows] * keep
            wef = self.w_eff_f[rows] * keep
        pnorm = np.sqrt(np.maximum(fm2 @ (z * z), 0.0))
        dots = wef @ z
        return pnorm, dots


class DN2Network:
    """A running network: hidden neurons, motor neurons, statistics, ports."""

    def __init__(self, layout: ZoneLayout, params: HyperParams, seed: int = 0):
        self.layout = layout
        self.params = params
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.age = 0
        self.frozen = False
        self.growth_enabled = True

        self.d_x = layout.x_dim
        self.d_z = layout.z_dim
        cap = params.n_y
        self.cap = cap

        # zone responses (previous step)
        self.y = np.zeros(cap)
        self.z = np.zeros(self.d_z)

        # hidden neurons
        self.neurons: list[Neuron] = []
        self._locations = np.zeros((cap, 3))
        self.glia: GlialGrid = init_glia(
            params.placement.n_g,
            params.placement.skull,
            k_pull=params.placement.k_pull,
            gamma=params.placement.gamma,
            n_dn=params.placement.n_dn,
            literal_update=params.placement.literal_update,
        )

        # inhibition statistics (candid running means, stored lazily)
        self._neg_sum = np.zeros(cap)  # cumulative firing pattern over all steps
        self._neg_sum_at_birth = np.zeros((cap, cap))
        self._neg_fired = np.zeros((cap, cap))  # per neuron: sum of patterns on its firing steps
        self._birth_step = np.zeros(cap, dtype=np.int64)
        self._fire_count = np.zeros(cap, dtype=np.int64)
        self._out_degree = np.zeros(cap, dtype=np.int64)

        # pre-response caches (refreshed for rows whose weights changed):
        # effective weights w*f, doubly-trimmed weights w*f^2 (the input is
        # trimmed by f as well), trim factors and their squares, row norms
        self._x_cache = _SectionCache(cap, self.d_x)
        self._z_cache = _SectionCache(cap, self.d_z)
        self._wvol = np.zeros(cap)
        self._peaks = np.zeros(cap)
        self._has_x = np.zeros(cap, dtype=bool)
        self._has_y = np.zeros(cap, dtype=bool)
        self._has_z = np.zeros(cap, dtype=bool)
        self._dirty: set = set()

        self.last_info: dict = {}
        self._init_population()
        n_z = len(self.z_neurons)
        self._zy_cache = _SectionCache(n_z, cap)
        self._z_lateral = np.array([("z" in zn.sections) for zn in self.z_neurons], dtype=bool)
        self._z_dirty: set = set(range(n_z))

    # ------------------------------------------------------------------ setup

    @classmethod
    def new(cls, layout: ZoneLayout, params: HyperParams, seed: int = 0) -> "DN2Network":
        return cls(layout, params, seed)

    def _make_sections(self, ptype: PatterningType, randomize: bool) -> dict:
        cap = self.cap
        seed = self.params.maintenance.deviation_seed
        sections = {}
        if ptype.has_x:
            sec = SynapseSection.fresh_over(np.arange(self.d_x), has_volume=True, deviation_seed=seed)
            if randomize:
                sec.weights = self.rng.standard_normal(self.d_x)
                sec.volume_weight = float(self.rng.standard_normal())
                sec.fresh[:] = False
                sec.volume_fresh = False
            sections["x"] = sec
        if ptype.has_y:
            sec = SynapseSection.fresh_over(np.arange(cap), deviation_seed=seed)
            sec.status[:] = CUT
            alive = len(self.neurons)
            sec.status[:alive] = ACTIVE
            if randomize and alive:
                sec.weights[:alive] = self.rng.standard_normal(alive)
                sec.fresh[:alive] = False
            sections["y"] = sec
        if ptype.has_z:
            sec = SynapseSection.fresh_over(np.arange(self.d_z), deviation_seed=seed)
            if randomize:
                sec.weights = self.rng.standard_normal(self.d_z)
                sec.fresh[:] = False
            sections["z"] = sec
        return sections

    def _init_population(self) -> None:
        # hidden zone: k+1 neurons, types round-robin over the enabled ones
        count = self.params.k + 1
        for i in range(count):
            code = self.layout.y_types[i % len(self.layout.y_types)]
            ptype = PatterningType(code)
            neuron = Neuron(
                id=i,
                type=ptype,
                sections=self._make_sections(ptype, randomize=True),
                firing_age=0,
                location=np.zeros(3),
                volume_state=VolumeState(alpha=self.params.volume_alpha),
            )
            loc = place_new_neuron(
                self._locations[:i], i - 1 if i else None, self.params.placement.skull, self.rng,
                self.params.placement.radius_fraction,
            )
            neuron.location = np.asarray(loc, dtype=np.float64)
            self._register_neuron(neuron)

        # motor zone: fixed population, bottom-up from the hidden zone
        self.z_neurons: list[Neuron] = []
        for zone in self.layout.z_zones:
            for j in range(zone.size):
                code = "011" if zone.lateral else "010"
                ptype = PatterningType(code)
                sections = {}
                seedv = self.params.maintenance.deviation_seed
                sec = SynapseSection.fresh_over(np.arange(self.cap), deviation_seed=seedv)
                sec.status[:] = CUT
                alive = len(self.neurons)
                sec.status[:alive] = ACTIVE
                sec.weights[:alive] = self.rng.standard_normal(alive)
                sec.fresh[:alive] = False
                sections["y"] = sec
                if zone.lateral:
                    lsec = SynapseSection.fresh_over(np.arange(self.d_z), deviation_seed=seedv)
                    lsec.weights = self.rng.standard_normal(self.d_z)
                    lsec.fresh[:] = False
                    sections["z"] = lsec
                self.z_neurons.append(
                    Neuron(id=len(self.z_neurons), type=ptype, sections=sections, firing_age=0)
                )

    def _register_neuron(self, neuron: Neuron) -> None:
        i = neuron.id
        if i != len(self.neurons):
            raise RuntimeError("neuron ids must be dense and in birth order")
        self.neurons.append(neuron)
        self._locations[i] = neuron.location
        self._birth_step[i] = self.age
        self._neg_sum_at_birth[i, : self.cap] = self._neg_sum
        self._peaks[i] = neuron.volume_state.peak
        self._has_x[i] = neuron.type.has_x
        self._has_y[i] = neuron.type.has_y
        self._has_z[i] = neuron.type.has_z
        self._dirty.add(i)
        # every later-born neuron is a new dimension for lateral and motor fields
        for other in self.neurons[:-1]:
            sec = other.sections.get("y")
            if sec is not None and sec.status[i] == CUT:
                sec.status[i] = ACTIVE
                sec.fresh[i] = True
                sec.spine_ages[i] = other.firing_age
        if hasattr(self, "z_neurons"):
            for zn in self.z_neurons:
                sec = zn.sections["y"]
                if sec.status[i] == CUT:
                    sec.status[i] = ACTIVE
                    sec.fresh[i] = True
                    sec.spine_ages[i] = zn.firing_age

    # ------------------------------------------------------------- cache sync

    def _sync_neuron(self, i: int) -> None:
        """Push array-held statistics back into the neuron object."""
        self.neurons[i].volume_state.peak = float(self._peaks[i])
        self.neurons[i].location = self._locations[i].copy()

    def _refresh_row(self, i: int) -> None:
        n = self.neurons[i]
        if n.type.has_x:
            sec = n.sections["x"]
            self._x_cache.refresh_row(i, sec)
            self._wvol[i] = sec.volume_weight
            self._x_cache.norm[i] = float(np.sqrt(self._x_cache.norm[i] ** 2 + sec.volume_weight**2))
        if n.type.has_z:
            self._z_cache.refresh_row(i, n.sections["z"])
        self._peaks[i] = n.volume_state.peak

    def _flush_dirty(self) -> None:
        for i in self._dirty:
            self._refresh_row(i)
        self._dirty.clear()

    # -------------------------------------------------------------- responses

    def _y_pre_responses(self, x: np.ndarray, missing: dict | None, update_stats: bool):
        """Per-component pre-responses for all alive hidden neurons."""
        self._flush_dirty()
        n = len(self.neurons)
        idx = np.arange(n)
        r_b: dict = {}
        r_t: dict = {}
        r_l: dict = {}
        x_present = missing.get("x") if missing else None
        z_present = missing.get("z") if missing else None

        xb = idx[self._has_x[:n]]
        if xb.size:
            mean, l, dotc = self._x_cache.centered_stats(x, xb, x_present)
            norms = self._x_cache.norm[xb]
            ok = norms > EPS_DEFAULT
            vals = np.zeros(xb.size)
            quiet = l <= EPS_DEFAULT
            loud = ~quiet & ok
            vals[quiet & ok] = self._wvol[xb][quiet & ok] / norms[quiet & ok]
            if np.any(loud):
                peaks = np.maximum(self._peaks[xb][loud], l[loud])
                if update_stats and x_present is None:
                    self._peaks[xb[loud]] = peaks
                a = (1.0 - self.params.volume_alpha) * (l[loud] / peaks)
                b = self.params.volume_alpha * (peaks - l[loud]) / peaks
                pn = np.sqrt(a * a + b * b)
                vals[loud] = (a * dotc[loud] / l[loud] + b * self._wvol[xb][loud]) / (pn * norms[loud])
            for j, v in zip(xb, vals):
                r_b[int(j)] = float(v)

        zb = idx[self._has_z[:n]]
        if zb.size:
            pnorm, dots = self._z_cache.plain_stats(self.z, zb, z_present)
            norms = self._z_cache.norm[zb]
            ok = (norms > EPS_DEFAULT) & (pnorm > EPS_DEFAULT)
            vals = np.zeros(zb.size)
            vals[ok] = dots[ok] / (norms[ok] * pnorm[ok])
            for j, v in zip(zb, vals):
                r_t[int(j)] = float(v)

        # lateral context does not exist until someone has fired; lateral
        # sections are evaluated per neuron (they only occur in small zones)
        if float(np.linalg.norm(self.y[:n])) > EPS_DEFAULT:
            for i in idx[self._has_y[:n]]:
                i = int(i)
                neuron = self.neurons[i]
                sec = neuron.sections["y"]
                w, p = neuron._section_slice(sec, self.y, missing.get("y") if missing else None)
                r_l[i] = normalized_dot(w, p) if p.size else 0.0

        totals = {}
        for i in range(n):
            acc = 0.0
            cnt = 0
            for d in (r_b, r_t, r_l):
                v = d.get(i)
                if v is not None:
                    acc += v
                    cnt += 1
            totals[i] = acc / cnt if cnt else 0.0
        return r_b, r_t, r_l, totals

    def _dynamic_set(self, i: int) -> set:
        n = len(self.neurons)
        alive_steps = self.age - self._birth_step[i]
        nf = int(alive_steps - self._fire_count[i])
        if nf <= 0:
            return set()
        v = (self._neg_sum[:n] - self._neg_sum_at_birth[i, :n] - self._neg_fired[i, :n]) / nf
        mean = float(v.sum()) / n
        return set(np.nonzero(v - mean > 0.0)[0].tolist())

    # ----------------------------------------------------------------- update

    def update(
        self,
        x,
        z_supervision: dict | None = None,
        learn: bool | None = None,
        z_learn: bool = True,
        missing: dict | None = None,
    ):
        """One network step: hidden zone, then motor zone, then replacement.

        ``z_supervision`` maps zone names to an index or a response vector;
        unlisted zones emerge from the motor computation.  ``z_learn=False``
        makes this a context-setting step: supervision still clamps the motor
        response but no motor weights are learned (the hidden zone learns as
        usual).  Returns copies of the new hidden and motor response vectors.
        """
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.d_x,):
            raise DimensionError(f"expected sensory dimension {self.d_x}, got {x.shape}")
        learning = (not self.frozen) if learn is None else (learn and not self.frozen)
        supervision = self._check_supervision(z_supervision)

        r_b, r_t, r_l, totals = self._y_pre_responses(x, missing, update_stats=learning)
        n = len(self.neurons)
        k = self.params.k
        k1 = self.params.k1 or default_prescreen_width(k, n, self.params.prescreen_fraction)
        k2 = self.params.k2 or k1
        k3 = self.params.k3 or k1
        sets = prescreen(r_b, r_t, r_l, k1, k2, k3, k)
        s_p = sets.s_p
        winner = min(s_p, key=lambda i: (-totals[i], i))

        split_id = None
        if learning and self._may_split(totals[winner]):
            split_id = self._do_split(winner, totals, x)
        if split_id is not None:
            firers = {split_id: 1.0}
        else:
            pre = {i: totals[i] for i in s_p}
            comp_sets = {i: self._dynamic_set(i) for i in s_p}
            result = compete(pre, comp_sets, k)
            firers = {i: result.responses[i] for i in result.firers}

        if learning:
            for i, y_i in firers.items():
                if i == split_id:
                    continue  # memorized at birth this step
                self._sync_neuron(i)
                excitatory_update(
                    self.neurons[i], x=x, y_prev=self.y[: self.cap], z_prev=self.z,
                    y_i=y_i, schedule=self.params.schedule, n0=self.params.maintenance.n_0,
                )
                self._peaks[i] = self.neurons[i].volume_state.peak
                self._dirty.add(i)

        y_new = np.zeros(self.cap)
        for i, y_i in firers.items():
            y_new[i] = y_i

        z_new, z_firers = self._z_phase(y_new, supervision, learning and z_learn)

        if learning:
            self._neg_sum[: self.cap] += y_new
            for i in firers:
                self._neg_fired[i, : self.cap] += y_new
                self._fire_count[i] += 1

        self.y = y_new
        self.z = z_new
        self.age += 1
        self.last_info = {
            "prescreen": sets,
            "winner": winner,
            "winner_pre_response": totals[winner],
            "split": split_id,
            "firers": dict(firers),
            "z_firers": z_firers,
            "totals": totals,
        }

        if learning:
            self._maintenance_pass(firers)
            if self.age % self.params.placement.n_dn == 0:
                self._placement_pass()
        return y_new.copy(), z_new.copy()

    # ------------------------------------------------------------ motor phase

    def _check_supervision(self, z_supervision: dict | None) -> dict:
        out = {}
        if not z_supervision:
            return out
        for name, val in z_supervision.items():
            try:
                zone = next(z for z in self.layout.z_zones if z.name == name)
            except StopIteration:
                raise SupervisionError(f"unknown motor zone {name!r}")
            if isinstance(val, (int, np.integer)):
                if not (0 <= int(val) < zone.size):
                    raise SupervisionError(f"index {val} out of range for zone {name!r}")
                vec = np.zeros(zone.size)
                vec[int(val)] = 1.0
            else:
                vec = np.asarray(val, dtype=np.float64)
                if vec.shape != (zone.size,):
                    raise SupervisionError(f"zone {name!r} expects {zone.size} values")
            out[name] = vec
        return out

    def _refresh_z_row(self, i: int) -> None:
        self._zy_cache.refresh_row(i, self.z_neurons[i].sections["y"])

    def _flush_z_dirty(self) -> None:
        for i in self._z_dirty:
            self._refresh_z_row(i)
        self._z_dirty.clear()

    def _z_phase(self, y_new: np.ndarray, supervision: dict, learning: bool):
        self._flush_z_dirty()
        z_new = np.zeros(self.d_z)
        z_firers: dict = {}
        n_z = len(self.z_neurons)
        need = [zone for zone in self.layout.z_zones if zone.name not in supervision]
        pre_all = None
        if need:
            pnorm, dots = self._zy_cache.plain_stats(y_new, None, None)
            norms = self._zy_cache.norm
            ok = (norms > EPS_DEFAULT) & (pnorm > EPS_DEFAULT)
            pre_all = np.zeros(n_z)
            pre_all[ok] = dots[ok] / (norms[ok] * pnorm[ok])
        for zone in self.layout.z_zones:
            sl = self.layout.z_slice(zone.name)
            offset = sl.start
            if zone.name in supervision:
                vec = supervision[zone.name]
                z_new[sl] = vec
                firing = {offset + j: float(v) for j, v in enumerate(vec) if v > 0}
            else:
                pre = {}
                for j in range(zone.size):
                    gi = offset + j
                    if self._z_lateral[gi]:
                        zn = self.z_neurons[gi]
                        comp = zn.component_pre_responses(y_prev=y_new, z_prev=self.z, update_volume=False)
                        pre[gi] = zn.total_pre_response(comp)
                    else:
                        pre[gi] = float(pre_all[gi])
                members = set(pre)
                result = compete(pre, {i: members for i in pre}, zone.k)
                firing = {i: result.responses[i] for i in result.firers}
                for i, v in firing.items():
                    z_new[i] = v
            if learning:
                for i, v in firing.items():
                    excitatory_update(
                        self.z_neurons[i], y_prev=y_new, z_prev=self.z,
                        y_i=v, schedule=self.params.schedule, n0=self.params.maintenance.n_0,
                    )
                    self._z_dirty.add(i)
            z_firers.update(firing)
        return z_new, z_firers

    # ---------------------------------------------------------------- growth

    def _allowed_types(self) -> set:
        allowed = set()
        for code in self.layout.y_types:
            start = self.params.hormone.get(code, 0)
            if self.age >= start:
                allowed.add(code)
        return allowed

    def _may_split(self, winner_pre: float) -> bool:
        if not self.growth_enabled:
            return False
        if len(self.neurons) >= self.params.n_y:
            return False
        if not self._allowed_types():
            return False
        m = almost_perfect_match(self.age, self.params.growth, self.params.theta)
        return winner_pre < m

    def _do_split(self, winner: int, totals: dict, x: np.ndarray) -> int | None:
        allowed = self._allowed_types()
        parent = winner
        if self.neurons[winner].type.code not in allowed:
            candidates = [i for i in totals if self.neurons[i].type.code in allowed]
            if not candidates:
                return None
            parent = min(candidates, key=lambda i: (-totals[i], i))
        new_id = len(self.neurons)
        self._sync_neuron(parent)
        jitter = self.rng.uniform(-1.0, 1.0, size=3) * self.params.placement.split_jitter
        clone, _ = split_neuron(
            self.neurons[parent],
            None,
            new_id,
            x=x,
            y_prev=self.y[: self.cap],
            z_prev=self.z,
            location_jitter=jitter,
            theta=self.params.theta,
            schedule=self.params.schedule,
        )
        clone.location = np.asarray(self.params.placement.skull.clamp(clone.location))
        # inhibition statistics start at age zero: under candid rates the
        # copied negative vector would be overwritten by the first update
        # anyway, so the newborn simply begins a fresh running mean
        self._register_neuron(clone)
        return new_id

    # ------------------------------------------------------------ maintenance

    def _glia_neighbor(self, section_key: str, source_id: int) -> int | None:
        if section_key == "x":
            return None  # sensory sources have no location
        n = len(self.neurons)
        if source_id >= n:
            return None
        if self._out_degree[source_id] >= self.params.l_out:
            return None
        return nearest_neighbor_via_glia(source_id, self._locations[:n], self.glia)

    def _maintenance_pass(self, firers: dict) -> None:
        n0 = self.params.maintenance.n_0
        for i in firers:
            neuron = self.neurons[i]
            if neuron.firing_age == 0 or neuron.firing_age % n0 != 0:
                continue
            self._sync_neuron(i)
            post_synaptic_maintain(neuron, self.params.maintenance, glia_index=self._glia_neighbor, warn=log.warning)
            self._dirty.add(i)
            # outgoing consistency: this neuron as a source for the motor zone
            changed = pre_synaptic_maintain("y", i, self.z_neurons, self.params.maintenance)
            self._z_dirty.update(changed)
            lateral_posts = [m for m in self.neurons if m.type.has_y]
            if lateral_posts:
                changed = pre_synaptic_maintain("y", i, lateral_posts, self.params.maintenance)
                for p in changed:
                    self._dirty.add(lateral_posts[p].id)

    def _placement_pass(self) -> None:
        n = len(self.neurons)
        if n == 0:
            return
        self._locations[:n] = update_locations(self._locations[:n], self.glia)
        for i in range(n):
            self.neurons[i].location = self._locations[i].copy()

    # ------------------------------------------------------------------ ports

    def supervise_z(self, z_supervision: dict) -> None:
        """Set the motor response directly, without a network step.

        This is the time-zero primitive: the body clamps the starting state
        before the first update.  No learning happens.
        """
        supervision = self._check_supervision(z_supervision)
        for name, vec in supervision.items():
            self.z[self.layout.z_slice(name)] = vec

    def predict_missing_context(
        self,
        x,
        missing_x_areas: tuple = (),
        missing_z_zones: tuple = (),
        z_supervision: dict | None = None,
    ):
        """Frozen probe with declared-missing input regions.

        Missing slices are zeroed and excluded from every normalization span,
        so the remaining context alone drives the match.  Returns the hidden
        and motor responses; the motor values of missing zones are the
        network's completion of the context.
        """
        if len(missing_x_areas) == len(self.layout.x_areas) and len(missing_z_zones) == len(self.layout.z_zones):
            raise ValueError("cannot declare every region missing")
        x = np.asarray(x, dtype=np.float64).copy()
        x_mask = np.ones(self.d_x, dtype=bool)
        for name in missing_x_areas:
            sl = self.layout.x_slice(name)
            x_mask[sl] = False
            x[sl] = 0.0
        z_mask = np.ones(self.d_z, dtype=bool)
        for name in missing_z_zones:
            z_mask[self.layout.z_slice(name)] = False
        missing = None
        if not x_mask.all() or not z_mask.all():
            missing = {"x": x_mask, "z": z_mask}
        return self.update(x, z_supervision=z_supervision, learn=False, missing=missing)

    # ------------------------------------------------------------- inspection

    @property
    def active_y_count(self) -> int:
        return len(self.neurons)

    def z_zone_values(self, name: str) -> np.ndarray:
        return self.z[self.layout.z_slice(name)].copy()

    def z_argmax(self, name: str) -> int | None:
        vals = self.z_zone_values(name)
        if np.all(vals <= 0):
            return None
        return int(np.argmax(vals))

    def y_locations(self) -> np.ndarray:
        return self._locations[: len(self.neurons)].copy()

    # ------------------------------------------------------------ persistence

    def snapshot(self) -> bytes:
        from . import snapshot as codec

        return codec.save_network(self)

    @classmethod
    def restore(cls, payload: bytes) -> "DN2Network":
        from . import snapshot as codec

        return codec.load_network(payload, cls)
