"""Audio framing, the simulated-cochlea front end, and the audition experiment.

Each 40 ms frame is pushed through a bank of sine filters spanning eleven
octave bands and ten initial phases, keeping phase information that spectral
magnitudes would discard.  A separate four-way volume code tells the network
how loud the frame was, so silence stays cheap to represent.
"""

from __future__ import annotations

import csv
import wave
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .growth import GrowthRateTable
from .network import DN2Network, HyperParams, XArea, ZZone, ZoneLayout

SAMPLE_RATE = 44_100
FRAME_MS = 40
HOP_MS = 20
FRAME_LEN = SAMPLE_RATE * FRAME_MS // 1000  # 1764
HOP_LEN = SAMPLE_RATE * HOP_MS // 1000  # 882

N_BANDS = 11
N_PHASES = 10
GAMMA = 0.5

SILENCE, LOW, MEDIUM, HIGH = 0, 1, 2, 3
VOLUME_NAMES = ("Silence", "Low", "Medium", "High")

N_PHONEMES = 44
# concept-1 states: silence, undecided ("free"), then one per phoneme class
STATE_SILENCE = 0
STATE_FREE = 1
N_CONCEPT1 = 2 + N_PHONEMES  # 46


class AudioError(ValueError):
    pass


def band_frequencies() -> np.ndarray:
    """The octave ladder 20, 40, ..., 20480 Hz."""
    return 20.0 * 2.0 ** np.arange(N_BANDS)


def frame_signal(waveform: np.ndarray) -> np.ndarray:
    """Split a waveform into 40 ms frames with 20 ms overlap.

    Returns an array of shape (n_frames, 1764); the trailing remainder that
    does not fill a frame is dropped.
    """
    w = np.asarray(waveform, dtype=np.float64)
    if w.ndim != 1 or w.size < FRAME_LEN:
        raise AudioError(f"waveform must hold at least {FRAME_LEN} samples")
    n = (w.size - FRAME_LEN) // HOP_LEN + 1
    out = np.empty((n, FRAME_LEN))
    for k in range(n):
        out[k] = w[k * HOP_LEN : k * HOP_LEN + FRAME_LEN]
    return out


_T_SECONDS = (np.arange(1, FRAME_LEN + 1) / SAMPLE_RATE)


def _filter_bank(time_in_seconds: bool = True) -> np.ndarray:
    """Sine filter bank, shape (N_BANDS * N_PHASES, FRAME_LEN)."""
    t = _T_SECONDS if time_in_seconds else np.arange(1, FRAME_LEN + 1, dtype=np.float64)
    omegas = 2.0 * np.pi * band_frequencies()
    thetas = 2.0 * np.arange(1, N_PHASES + 1) * np.pi / N_PHASES
    bank = np.sin(omegas[:, None, None] * t[None, None, :] + thetas[None, :, None])
    return bank.reshape(N_BANDS * N_PHASES, FRAME_LEN)


_BANK_SECONDS = _filter_bank(True)
_BANK_INDEX: np.ndarray | None = None


def extract_features(frame: np.ndarray, time_in_seconds: bool = True) -> np.ndarray:
    """Feature matrix A (11 x 10): correlation with each band/phase filter.

    Gamma correction with exponent 0.5 is applied to the magnitude of each
    element, keeping the sign so phase information survives.
    """
    global _BANK_INDEX
    frame = np.asarray(frame, dtype=np.float64)
    if frame.shape != (FRAME_LEN,):
        raise AudioError(f"frame must have {FRAME_LEN} samples")
    if time_in_seconds:
        bank = _BANK_SECONDS
    else:
        if _BANK_INDEX is None:
            _BANK_INDEX = _filter_bank(False)
        bank = _BANK_INDEX
    a = bank @ frame
    a = np.sign(a) * np.abs(a) ** GAMMA
    return a.reshape(N_BANDS, N_PHASES)


def volume_code(frame: np.ndarray, thresholds) -> np.ndarray:
    """One-hot volume class from the frame's l2 norm against three thresholds."""
    t1, t2, t3 = thresholds
    if not (t1 <= t2 <= t3):
        raise ValueError("thresholds must be ascending")
    n = float(np.linalg.norm(np.asarray(frame, dtype=np.float64)))
    out = np.zeros(4)
    if n < t1:
        out[SILENCE] = 1.0
    elif n < t2:
        out[LOW] = 1.0
    elif n < t3:
        out[MEDIUM] = 1.0
    else:
        out[HIGH] = 1.0
    return out


def load_wav(path) -> np.ndarray:
    """Mono 16-bit PCM at 44.1 kHz, scaled to [-1, 1]."""
    with wave.open(str(path), "rb") as fh:
        if fh.getframerate() != SAMPLE_RATE:
            raise AudioError(f"expected {SAMPLE_RATE} Hz, got {fh.getframerate()}")
        if fh.getnchannels() != 1 or fh.getsampwidth() != 2:
            raise AudioError("expected mono 16-bit PCM")
        raw = fh.readframes(fh.getnframes())
    return np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0


# ------------------------------------------------------------------- corpus


@dataclass
class Corpus:
    """Synthetic labeled phoneme waveforms plus silence statistics."""

    utterances: dict  # class id -> waveform (silence + phoneme + silence)
    thresholds: tuple
    seed: int


def _phoneme_params(seed: int):
    """44 well-separated harmonic-stack recipes."""
    rng = np.random.default_rng(seed)
    params = []
    for c in range(N_PHONEMES):
        f0 = 110.0 * 2 ** (c / 12.0)  # one semitone apart
        n_h = 3 + (c % 4)
        amps = rng.uniform(0.3, 1.0, size=n_h)
        amps /= np.linalg.norm(amps)
        params.append((f0, amps))
    return params


def _synth_utterance(f0, amps, rng, jitter: float, phoneme_ms=200, pad_ms=500, silence_amp=0.003):
    n_pad = SAMPLE_RATE * pad_ms // 1000
    n_ph = SAMPLE_RATE * phoneme_ms // 1000
    t = np.arange(n_ph) / SAMPLE_RATE
    f = f0 * (1.0 + jitter * rng.uniform(-1, 1))
    wavev = np.zeros(n_ph)
    for h, a in enumerate(amps, start=1):
        a_j = a * (1.0 + jitter * rng.uniform(-1, 1))
        wavev += a_j * np.sin(2 * np.pi * f * h * t + rng.uniform(0, 2 * np.pi) * jitter)
    wavev *= 0.8 / max(1e-9, np.max(np.abs(wavev)))
    pad1 = silence_amp * rng.standard_normal(n_pad)
    pad2 = silence_amp * rng.standard_normal(n_pad)
    return np.concatenate([pad1, wavev, pad2]), n_pad, n_ph


def synth_corpus(seed: int, jitter: float = 0.0) -> Corpus:
    """44 synthetic phoneme classes padded by 500 ms of near-silence.

    ``jitter`` perturbs pitch, harmonic amplitudes and phases per utterance;
    zero jitter reproduces the canonical training recordings exactly.
    """
    rng = np.random.default_rng(seed)
    params = _phoneme_params(seed=1234)  # class recipes are fixed; takes vary
    utterances = {}
    for c, (f0, amps) in enumerate(params):
        wavev, _, _ = _synth_utterance(f0, amps, rng, jitter)
        utterances[c] = wavev
    norms = []
    for wavev in utterances.values():
        norms.extend(np.linalg.norm(f) for f in frame_signal(wavev))
    thresholds = tuple(np.percentile(norms, [25, 50, 75]).tolist())
    return Corpus(utterances=utterances, thresholds=thresholds, seed=seed)


def utterance_script(waveform: np.ndarray, label: int, pad_ms=500, phoneme_ms=200):
    """Per-frame concept-1 supervision: silence, free while the phoneme
    plays, the class label on the first trailing silence frame, then silence."""
    n_pad = SAMPLE_RATE * pad_ms // 1000
    n_ph = SAMPLE_RATE * phoneme_ms // 1000
    frames = frame_signal(waveform)
    script = []
    labeled = False
    for k in range(frames.shape[0]):
        start = k * HOP_LEN
        end = start + FRAME_LEN
        overlaps = start < n_pad + n_ph and end > n_pad
        if overlaps:
            script.append(STATE_FREE)
        elif not labeled and start >= n_pad + n_ph:
            script.append(2 + label)
            labeled = True
        else:
            script.append(STATE_SILENCE)
    return frames, script


# --------------------------------------------------------------- experiment


@dataclass
class AuditionConfig:
    seed: int = 0
    n_y: int = 1600
    growth_rate: float = 0.97
    pretrain_frames: int = 80
    disjoint_jitter: float = 0.02
    n_stage: int = 800
    time_in_seconds: bool = True


@dataclass
class AuditionReport:
    resubstitution_error: float
    disjoint_errors: list
    neurons_used: int
    per_test_frames: int
    silence_recruits_after_first: int

    def rows(self):
        out = [("resubstitution", self.resubstitution_error)]
        out += [(f"disjoint_{i+1}", e) for i, e in enumerate(self.disjoint_errors)]
        return out


def audition_network(cfg: AuditionConfig) -> DN2Network:
    layout = ZoneLayout(
        x_areas=(XArea("features", N_BANDS * N_PHASES), XArea("volume", 4)),
        z_zones=(
            ZZone("phone", N_CONCEPT1),
            ZZone("stage", cfg.n_stage),
            ZZone("loudness", 4),
        ),
        y_types=("100", "101"),
    )
    params = HyperParams(
        growth=GrowthRateTable([(0, cfg.growth_rate)]),
        k=1,
        n_y=cfg.n_y,
        hormone={"100": 0, "101": cfg.pretrain_frames},
    )
    return DN2Network(layout, params, seed=cfg.seed)


def frame_input(frame: np.ndarray, thresholds, time_in_seconds=True):
    feats = extract_features(frame, time_in_seconds).ravel()
    vol = volume_code(frame, thresholds)
    return np.concatenate([feats, vol]), vol


def _train(net: DN2Network, corpus: Corpus, cfg: AuditionConfig):
    rng = np.random.default_rng(cfg.seed + 971)
    # pre-training: random frames across the volume range, loudness supervised
    amp_levels = (0.003, 0.05, 0.3, 0.9)
    for k in range(cfg.pretrain_frames):
        amp = amp_levels[k % 4]
        frame = amp * rng.standard_normal(FRAME_LEN)
        x, vol = frame_input(frame, corpus.thresholds, cfg.time_in_seconds)
        net.update(x, {"loudness": int(np.argmax(vol))})
    # main training: one pass over the 44 subsequences
    for label in sorted(corpus.utterances):
        frames, script = utterance_script(corpus.utterances[label], label)
        for frame, state in zip(frames, script):
            x, vol = frame_input(frame, corpus.thresholds, cfg.time_in_seconds)
            net.update(x, {"phone": state, "loudness": int(np.argmax(vol))})


def _test(net: DN2Network, corpus: Corpus, cfg: AuditionConfig):
    """Frozen pass; supervision only on the first frame of the session."""
    was = net.frozen
    net.frozen = True
    errors = 0
    total = 0
    first = True
    try:
        for label in sorted(corpus.utterances):
            frames, script = utterance_script(corpus.utterances[label], label)
            for frame, state in zip(frames, script):
                x, vol = frame_input(frame, corpus.thresholds, cfg.time_in_seconds)
                if first:
                    net.update(x, {"phone": state, "loudness": int(np.argmax(vol))})
                    first = False
                else:
                    net.update(x, None)
                got = net.z_argmax("phone")
                errors += int(got != state)
                total += 1
    finally:
        net.frozen = was
    return errors, total


def run_audition_experiment(cfg: AuditionConfig | None = None, out_path=None) -> AuditionReport:
    """Resubstitution plus three partial disjoint tests on the synthetic corpus."""
    cfg = cfg or AuditionConfig()
    corpus = synth_corpus(cfg.seed, jitter=0.0)
    net = audition_network(cfg)
    _train(net, corpus, cfg)

    silence_recruits = _count_silence_recruits(net, corpus, cfg)

    resub_err, total = _test(net, corpus, cfg)
    disjoint = []
    for variant in range(3):
        alt = synth_corpus(cfg.seed + 1000 + variant, jitter=cfg.disjoint_jitter)
        mixed = dict(corpus.utterances)
        for label in range(0, N_PHONEMES, 2):  # half the subsequences replaced
            mixed[label] = alt.utterances[label]
        dis = Corpus(utterances=mixed, thresholds=corpus.thresholds, seed=alt.seed)
        err, tot = _test(net, dis, cfg)
        disjoint.append(err / tot * 100.0)

    report = AuditionReport(
        resubstitution_error=resub_err / total * 100.0,
        disjoint_errors=disjoint,
        neurons_used=net.active_y_count,
        per_test_frames=total,
        silence_recruits_after_first=silence_recruits,
    )
    if out_path is not None:
        with open(out_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["test", "error_percent"])
            for name, err in report.rows():
                w.writerow([name, f"{err:.4f}"])
    return report


def _count_silence_recruits(net: DN2Network, corpus: Corpus, cfg: AuditionConfig) -> int:
    """Recruits triggered by silence frames when re-presenting one utterance.

    With volume augmentation active, the near-silence frames collapse onto
    the volume axis, so after the first exposure they match existing cells
    and recruit nothing.
    """
    label = 0
    frames, script = utterance_script(corpus.utterances[label], label)
    before = net.active_y_count
    recruits = 0
    for frame, state in zip(frames, script):
        if state != STATE_SILENCE:
            continue
        x, vol = frame_input(frame, corpus.thresholds, cfg.time_in_seconds)
        net.update(x, {"phone": state, "loudness": int(np.argmax(vol))})
        if net.active_y_count > before:
            recruits += net.active_y_count - before
            before = net.active_y_count
    return recruits
