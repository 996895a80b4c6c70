"""Vector preprocessing shared by all zones.

Sensory vectors are mean-centered, contrast-normalized and augmented with a
volume component that tracks how loud the current input is relative to the
loudest input seen so far.  The augmented vector is always a unit vector, so
a near-silent input collapses onto the volume axis instead of boosting noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EPS_DEFAULT = 10.0 * np.finfo(np.float64).eps


class DimensionError(ValueError):
    """Raised when an input vector has an unusable dimension."""


@dataclass
class VolumeState:
    """Running volume statistics owned by one neuron's sensory field.

    ``peak`` is the largest Euclidean norm seen so far (monotone
    nondecreasing).  ``alpha`` weighs the away-from-peak term when the volume
    component is appended.
    """

    peak: float = 0.0
    alpha: float = 0.2
    eps: float = EPS_DEFAULT

    def copy(self) -> "VolumeState":
        return VolumeState(self.peak, self.alpha, self.eps)


def unit_normalize(v: np.ndarray, eps: float = EPS_DEFAULT) -> np.ndarray:
    """Return ``v / ||v||``; near-zero vectors pass through unchanged."""
    v = np.asarray(v, dtype=np.float64)
    n = float(np.linalg.norm(v))
    if n > eps:
        return v / n
    return v.copy()


def normalized_dot(v: np.ndarray, p: np.ndarray, eps: float = EPS_DEFAULT) -> float:
    """Inner product of the unit-normalized vectors, in [-1, 1]."""
    v = np.asarray(v, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if v.shape != p.shape:
        raise DimensionError(f"shape mismatch: {v.shape} vs {p.shape}")
    nv = float(np.linalg.norm(v))
    np_ = float(np.linalg.norm(p))
    if nv <= eps or np_ <= eps:
        return 0.0
    return float(np.dot(v, p) / (nv * np_))


def normalize_with_volume(
    p: np.ndarray, state: VolumeState, update_state: bool = True
) -> tuple[np.ndarray, VolumeState]:
    """Mean-center, contrast-normalize and append a volume component.

    Steps, in order: subtract the mean; measure the volume ``l = ||p||``;
    scale to unit length when the volume is above ``eps``; fold the volume
    into one extra component weighted by ``alpha`` against the running peak;
    renormalize in d+1 dimensions.  A (near-)constant input maps exactly to
    ``(0, ..., 0, 1)``.

    Returns the unit vector in ``R^{d+1}`` and the updated state.  With
    ``update_state=False`` the peak statistic is left untouched (frozen
    networks keep responding without learning new statistics).
    """
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size < 1:
        raise DimensionError("input must be a 1-D vector with d >= 1")

    centered = p - p.mean()
    l = float(np.linalg.norm(centered))

    if l <= state.eps:
        out = np.zeros(p.size + 1)
        out[-1] = 1.0
        return out, state

    unit = centered / l
    new_peak = max(state.peak, l)
    if update_state:
        state.peak = new_peak

    alpha = state.alpha
    away = (new_peak - l) / new_peak
    out = np.empty(p.size + 1)
    out[:-1] = (1.0 - alpha) * (l / new_peak) * unit
    out[-1] = alpha * away
    out /= np.linalg.norm(out)
    return out, state
