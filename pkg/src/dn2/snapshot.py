"""Versioned binary snapshots of a running network.

Container layout: an 8-byte magic, a format version, a CRC and the length of
the body, then an in-memory npz archive holding every array plus a JSON
metadata blob.  Floats travel as raw IEEE-754 bytes, so a restored network
replays bit-identically.
"""

from __future__ import annotations

import io
import json
import zlib

import numpy as np

from .growth import GrowthRateTable
from .learning import AmnesicSchedule
from .maintenance import MaintenanceParams
from .neuron import Neuron, PatterningType, SynapseSection
from .normalize import VolumeState
from .placement import Skull

MAGIC = b"DN2SNAP\x00"
VERSION = 1


class SnapshotError(ValueError):
    """Corrupt, truncated or incompatible snapshot payload."""


SECTION_ARRAYS = ("weights", "factors", "status", "spine_ages", "deviations", "fresh")


def _pack_sections(neurons, key, arrays: dict, prefix: str) -> None:
    mask = np.array([key in n.sections for n in neurons], dtype=bool)
    arrays[f"{prefix}_has"] = mask
    withs = [n.sections[key] for n in neurons if key in n.sections]
    if not withs:
        return
    for name in SECTION_ARRAYS:
        arrays[f"{prefix}_{name}"] = np.stack([getattr(s, name) for s in withs])
    if key == "x":
        arrays[f"{prefix}_volume_weight"] = np.array([s.volume_weight for s in withs])
        arrays[f"{prefix}_volume_fresh"] = np.array([s.volume_fresh for s in withs], dtype=bool)


def _unpack_sections(arrays: dict, prefix: str, span: int, has_volume: bool):
    mask = arrays[f"{prefix}_has"]
    out = []
    pos = 0
    for present in mask:
        if not present:
            out.append(None)
            continue
        sec = SynapseSection(
            ids=np.arange(span, dtype=np.int64),
            weights=arrays[f"{prefix}_weights"][pos].copy(),
            factors=arrays[f"{prefix}_factors"][pos].copy(),
            status=arrays[f"{prefix}_status"][pos].copy(),
            spine_ages=arrays[f"{prefix}_spine_ages"][pos].copy(),
            deviations=arrays[f"{prefix}_deviations"][pos].copy(),
            fresh=arrays[f"{prefix}_fresh"][pos].copy(),
            has_volume=has_volume,
        )
        if has_volume:
            sec.volume_weight = float(arrays[f"{prefix}_volume_weight"][pos])
            sec.volume_fresh = bool(arrays[f"{prefix}_volume_fresh"][pos])
        out.append(sec)
        pos += 1
    return out


def save_network(net) -> bytes:
    net._flush_dirty()
    net._flush_z_dirty()
    p = net.params
    meta = {
        "layout": {
            "x_areas": [(a.name, a.dim) for a in net.layout.x_areas],
            "z_zones": [
                (z.name, z.size, z.none_index, z.lateral, z.k) for z in net.layout.z_zones
            ],
            "y_types": list(net.layout.y_types),
        },
        "params": {
            "growth_steps": p.growth.steps,
            "k": p.k,
            "l_in": p.l_in,
            "l_out": p.l_out,
            "n_y": p.n_y,
            "n_z": p.n_z,
            "k1": p.k1,
            "k2": p.k2,
            "k3": p.k3,
            "prescreen_fraction": p.prescreen_fraction,
            "maintenance": [
                p.maintenance.beta_s, p.maintenance.beta_b, p.maintenance.n_u,
                p.maintenance.n_0, p.maintenance.buffer_fraction, p.maintenance.deviation_seed,
            ],
            "placement": {
                "skull_lo": list(p.placement.skull.lo),
                "skull_hi": list(p.placement.skull.hi),
                "n_g": p.placement.n_g,
                "k_pull": p.placement.k_pull,
                "gamma": p.placement.gamma,
                "n_dn": p.placement.n_dn,
                "literal_update": p.placement.literal_update,
                "radius_fraction": p.placement.radius_fraction,
                "split_jitter": p.placement.split_jitter,
            },
            "schedule": [p.schedule.t1, p.schedule.t2, p.schedule.c, p.schedule.r],
            "theta": p.theta,
            "volume_alpha": p.volume_alpha,
            "hormone": p.hormone,
        },
        "seed": net.seed,
        "age": net.age,
        "frozen": net.frozen,
        "growth_enabled": net.growth_enabled,
        "y_type_codes": [n.type.code for n in net.neurons],
        "y_firing_ages": [n.firing_age for n in net.neurons],
        "y_peaks": net._peaks[: len(net.neurons)].tolist(),
        "z_firing_ages": [n.firing_age for n in net.z_neurons],
        "rng_state": json.loads(json.dumps(net.rng.bit_generator.state, default=int)),
    }
    arrays: dict = {}
    n = len(net.neurons)
    arrays["resp_y"] = net.y
    arrays["resp_z"] = net.z
    arrays["locations"] = net._locations[:n]
    arrays["neg_sum"] = net._neg_sum
    arrays["neg_sum_at_birth"] = net._neg_sum_at_birth[:n]
    arrays["neg_fired"] = net._neg_fired[:n]
    arrays["birth_step"] = net._birth_step[:n]
    arrays["fire_count"] = net._fire_count[:n]
    arrays["out_degree"] = net._out_degree[:n]
    for key in ("x", "y", "z"):
        _pack_sections(net.neurons, key, arrays, f"yn_{key}")
    for key in ("y", "z"):
        _pack_sections(net.z_neurons, key, arrays, f"zn_{key}")

    buf = io.BytesIO()
    meta_bytes = json.dumps(meta).encode()
    arrays["meta_json"] = np.frombuffer(meta_bytes, dtype=np.uint8)
    np.savez(buf, **arrays)
    body = buf.getvalue()
    header = MAGIC + VERSION.to_bytes(4, "little") + zlib.crc32(body).to_bytes(4, "little") + len(body).to_bytes(8, "little")
    return header + body


def load_network(payload: bytes, cls):
    if len(payload) < 24 or payload[:8] != MAGIC:
        raise SnapshotError("not a network snapshot (bad magic)")
    version = int.from_bytes(payload[8:12], "little")
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    crc = int.from_bytes(payload[12:16], "little")
    length = int.from_bytes(payload[16:24], "little")
    body = payload[24:]
    if len(body) != length or zlib.crc32(body) != crc:
        raise SnapshotError("snapshot payload is truncated or corrupt")
    try:
        with np.load(io.BytesIO(body), allow_pickle=False) as zf:
            arrays = {k: zf[k] for k in zf.files}
    except Exception as exc:
        raise SnapshotError(f"snapshot payload is unreadable: {exc}") from exc
    meta = json.loads(bytes(arrays["meta_json"].tobytes()).decode())

    from .network import HyperParams, PlacementParams, XArea, ZZone, ZoneLayout

    lay = meta["layout"]
    layout = ZoneLayout(
        x_areas=tuple(XArea(n, d) for n, d in lay["x_areas"]),
        z_zones=tuple(ZZone(n, s, ni, lat, k) for n, s, ni, lat, k in lay["z_zones"]),
        y_types=tuple(lay["y_types"]),
    )
    mp = meta["params"]
    maint = MaintenanceParams(*mp["maintenance"][:2], n_u=int(mp["maintenance"][2]),
                              n_0=int(mp["maintenance"][3]), buffer_fraction=mp["maintenance"][4],
                              deviation_seed=mp["maintenance"][5])
    pl = mp["placement"]
    placement = PlacementParams(
        skull=Skull(tuple(pl["skull_lo"]), tuple(pl["skull_hi"])),
        n_g=pl["n_g"], k_pull=pl["k_pull"], gamma=pl["gamma"], n_dn=pl["n_dn"],
        literal_update=pl["literal_update"], radius_fraction=pl["radius_fraction"],
        split_jitter=pl["split_jitter"],
    )
    params = HyperParams(
        growth=GrowthRateTable(mp["growth_steps"]),
        k=mp["k"], l_in=mp["l_in"], l_out=mp["l_out"], n_y=mp["n_y"], n_z=mp["n_z"],
        k1=mp["k1"], k2=mp["k2"], k3=mp["k3"], prescreen_fraction=mp["prescreen_fraction"],
        maintenance=maint, placement=placement,
        schedule=AmnesicSchedule(*mp["schedule"]),
        theta=mp["theta"], volume_alpha=mp["volume_alpha"], hormone=dict(mp["hormone"]),
    )
    net = cls(layout, params, seed=meta["seed"])
    net.age = meta["age"]
    net.frozen = meta["frozen"]
    net.growth_enabled = meta["growth_enabled"]
    net.rng.bit_generator.state = meta["rng_state"]
    net.y = arrays["resp_y"].copy()
    net.z = arrays["resp_z"].copy()

    n = len(meta["y_type_codes"])
    net._neg_sum[:] = arrays["neg_sum"]
    net._neg_sum_at_birth[:n] = arrays["neg_sum_at_birth"]
    net._neg_fired[:n] = arrays["neg_fired"]
    net._birth_step[:n] = arrays["birth_step"]
    net._fire_count[:n] = arrays["fire_count"]
    net._out_degree[:n] = arrays["out_degree"]
    net._locations[:n] = arrays["locations"]

    x_secs = _unpack_sections(arrays, "yn_x", layout.x_dim, has_volume=True)
    y_secs = _unpack_sections(arrays, "yn_y", params.n_y, has_volume=False)
    z_secs = _unpack_sections(arrays, "yn_z", layout.z_dim, has_volume=False)
    neurons = []
    for i in range(n):
        sections = {}
        if x_secs[i] is not None:
            sections["x"] = x_secs[i]
        if y_secs[i] is not None:
            sections["y"] = y_secs[i]
        if z_secs[i] is not None:
            sections["z"] = z_secs[i]
        neurons.append(
            Neuron(
                id=i,
                type=PatterningType(meta["y_type_codes"][i]),
                sections=sections,
                firing_age=int(meta["y_firing_ages"][i]),
                location=arrays["locations"][i].copy(),
                volume_state=VolumeState(peak=float(meta["y_peaks"][i]), alpha=params.volume_alpha),
            )
        )
    net.neurons = neurons
    net._has_x[:n] = [t.has_x for t in (m.type for m in neurons)]
    net._has_y[:n] = [m.type.has_y for m in neurons]
    net._has_z[:n] = [m.type.has_z for m in neurons]
    net._peaks[:n] = [m.volume_state.peak for m in neurons]

    zy = _unpack_sections(arrays, "zn_y", params.n_y, has_volume=False)
    zz = _unpack_sections(arrays, "zn_z", layout.z_dim, has_volume=False)
    for i, zn in enumerate(net.z_neurons):
        sections = {"y": zy[i]}
        if zz[i] is not None:
            sections["z"] = zz[i]
        zn.sections = sections
        zn.firing_age = int(meta["z_firing_ages"][i])

    net._dirty = set(range(n))
    net._z_dirty = set(range(len(net.z_neurons)))
    net._flush_dirty()
    net._flush_z_dirty()
    return net
