"""3D neuron placement: the skull, the glial lattice and periodic pulling.

Glial cells sit on a fixed lattice filling the skull.  Every few dozen network
updates each cell pulls its nearest neurons toward itself; over a lifetime the
population spreads from the center into the whole volume while neurons with
similar histories stay near each other.  The same lattice doubles as a cheap
nearest-neighbor index for synapse growth.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Skull:
    """Axis-aligned bounds of the space neurons may occupy."""

    lo: tuple = (0.0, 0.0, 0.0)
    hi: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if not all(h > l for l, h in zip(self.lo, self.hi)):
            raise ValueError("skull must have positive extent on each axis")

    @property
    def center(self) -> np.ndarray:
        return (np.asarray(self.lo) + np.asarray(self.hi)) / 2.0

    @property
    def extent(self) -> np.ndarray:
        return np.asarray(self.hi) - np.asarray(self.lo)

    def clamp(self, p: np.ndarray) -> np.ndarray:
        return np.clip(p, self.lo, self.hi)


@dataclass
class GlialGrid:
    """Fixed glial cells on a cube lattice, with pull parameters."""

    cells: np.ndarray
    skull: Skull
    k_pull: int = 4
    gamma: float = 0.1
    n_dn: int = 50
    literal_update: bool = True  # blend toward the force; False adds a displacement

    def __post_init__(self):
        if not (0.0 < self.gamma < 1.0):
            raise ValueError("gamma must lie in (0, 1)")


def init_glia(n_g: int, skull: Skull, k_pull: int = 4, gamma: float = 0.1, n_dn: int = 50, literal_update: bool = True) -> GlialGrid:
    """Regular lattice of about ``n_g`` cells (rounded to the nearest cube)."""
    if n_g < 1:
        raise ValueError("need at least one glial cell")
    m = max(1, round(n_g ** (1.0 / 3.0)))
    axes = [np.asarray(skull.lo)[d] + (np.arange(m) + 0.5) / m * skull.extent[d] for d in range(3)]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    cells = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    return GlialGrid(cells=cells, skull=skull, k_pull=k_pull, gamma=gamma, n_dn=n_dn, literal_update=literal_update)


def update_locations(locations: np.ndarray, grid: GlialGrid) -> np.ndarray:
    """One placement pass: each glial cell pulls its k nearest neurons.

    Per pulled neuron the received forces (cell minus neuron) are averaged
    and folded into the location.  The literal rule blends the location
    toward the force vector; the displacement rule adds gamma times the
    force instead.  Unpulled neurons do not move.
    """
    locs = np.asarray(locations, dtype=np.float64)
    if locs.size == 0:
        return locs.copy()
    n = locs.shape[0]
    force_sum = np.zeros_like(locs)
    force_cnt = np.zeros(n, dtype=np.int64)
    k = min(grid.k_pull, n)
    for g in grid.cells:
        d2 = np.einsum("ij,ij->i", locs - g, locs - g)
        nearest = np.argsort(d2, kind="stable")[:k]
        force_sum[nearest] += g - locs[nearest]
        force_cnt[nearest] += 1
    out = locs.copy()
    pulled = force_cnt > 0
    f = force_sum[pulled] / force_cnt[pulled, None]
    if grid.literal_update:
        out[pulled] = (1.0 - grid.gamma) * locs[pulled] + grid.gamma * f
    else:
        out[pulled] = locs[pulled] + grid.gamma * f
    return grid.skull.clamp(out)


def place_new_neuron(
    existing: np.ndarray,
    parent_index: int | None,
    skull: Skull,
    rng: np.random.Generator,
    radius_fraction: float = 0.05,
) -> np.ndarray:
    """Location for a newcomer: skull center first, then near its parent."""
    existing = np.asarray(existing, dtype=np.float64)
    if existing.size == 0 or parent_index is None:
        return skull.center
    parent = existing[parent_index]
    offset = rng.uniform(-1.0, 1.0, size=3) * radius_fraction * skull.extent
    return skull.clamp(parent + offset)


def nearest_neighbor_via_glia(
    index: int,
    locations: np.ndarray,
    grid: GlialGrid,
    k_list: int | None = None,
) -> int | None:
    """Nearest neighbor of one neuron among the lists of its 8 nearest cells.

    Each glial cell maintains (here: recomputes) a list of its k nearest
    neurons; the search unions the lists of the 8 cells around the query
    neuron, which avoids a full quadratic scan.  Exact within that candidate
    set; ties go to the lower id.
    """
    locs = np.asarray(locations, dtype=np.float64)
    n = locs.shape[0]
    if n < 2:
        return None
    k = k_list if k_list is not None else grid.k_pull
    k = min(max(k, 2), n)
    me = locs[index]
    cell_d2 = np.einsum("ij,ij->i", grid.cells - me, grid.cells - me)
    around = np.argsort(cell_d2, kind="stable")[: min(8, grid.cells.shape[0])]
    candidates: set = set()
    for c in around:
        d2 = np.einsum("ij,ij->i", locs - grid.cells[c], locs - grid.cells[c])
        candidates.update(np.argsort(d2, kind="stable")[:k].tolist())
    candidates.discard(index)
    if not candidates:
        return None
    cand = sorted(candidates)
    d2 = np.einsum("ij,ij->i", locs[cand] - me, locs[cand] - me)
    return int(cand[int(np.argmin(d2))])


def write_locations_csv(path, ids, type_codes, locations, firing_ages) -> None:
    """Emit one row per neuron: id, type, x, y, z, firing_age."""
    locations = np.asarray(locations, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "type", "x", "y", "z", "firing_age"])
        for i, code, loc, age in zip(ids, type_codes, locations, firing_ages):
            w.writerow([i, code, f"{loc[0]:.9g}", f"{loc[1]:.9g}", f"{loc[2]:.9g}", age])
