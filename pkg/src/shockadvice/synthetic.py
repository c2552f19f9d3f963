"""Synthetic WFDB databases with rhythm annotations, for tests and demos.

Sinus episodes are pulse trains (QRS and T waves) with baseline wander;
fibrillation is a few incommensurate 3.5-7 Hz sinusoids with slow amplitude
modulation; tachycardia is a fast train of wide complexes. Noise episodes
are labelled so they get discarded.
"""

import os

import numpy as np

from . import wfdb

RHYTHMS = ("N", "VF", "VT", "AFIB", "NOISE")
_WEIGHTS = (0.45, 0.25, 0.12, 0.12, 0.06)


def _pulse_train(t, rate_hz, width, amp, jitter, rng, t_wave=True):
    x = np.zeros_like(t)
    beat = rng.uniform(0, 1.0 / rate_hz)
    while beat < t[-1] + 0.5:
        x += amp * np.exp(-0.5 * ((t - beat) / width) ** 2)
        if t_wave:
            x += 0.25 * amp * np.exp(-0.5 * ((t - beat - 0.25) / 0.06) ** 2)
        beat += (1.0 / rate_hz) * (1 + jitter * rng.normal())
    return x


def episode(rhythm, seconds, fs, rng):
    """Physical-unit samples (mV) of one rhythm episode."""
    t = np.arange(int(round(seconds * fs))) / fs
    if rhythm == "N":
        x = _pulse_train(t, rng.uniform(1.0, 1.6), 0.018, rng.uniform(0.8, 1.4), 0.03, rng)
    elif rhythm == "AFIB":
        x = _pulse_train(t, rng.uniform(1.3, 2.2), 0.02, rng.uniform(0.7, 1.2), 0.2, rng,
                         t_wave=False)
        x += 0.05 * np.sin(2 * np.pi * rng.uniform(5, 8) * t + rng.uniform(0, 6.3))
    elif rhythm == "VT":
        x = _pulse_train(t, rng.uniform(2.5, 3.5), 0.06, rng.uniform(0.8, 1.5), 0.02, rng,
                         t_wave=False)
    elif rhythm == "VF":
        x = np.zeros_like(t)
        for _ in range(3):
            f = rng.uniform(3.5, 7.0)
            am = 1 + 0.4 * np.sin(2 * np.pi * rng.uniform(0.1, 0.4) * t + rng.uniform(0, 6.3))
            x += rng.uniform(0.15, 0.35) * am * np.sin(2 * np.pi * f * t + rng.uniform(0, 6.3))
    elif rhythm == "NOISE":
        x = rng.normal(scale=0.5, size=t.size)
    else:
        raise ValueError(f"unknown rhythm {rhythm!r}")
    wander = 0.2 * np.sin(2 * np.pi * rng.uniform(0.1, 0.4) * t + rng.uniform(0, 6.3))
    return x + wander + 0.02 * rng.normal(size=t.size)


def make_record(rng, seconds=120.0, fs=250.0):
    """Samples (mV) and ``[(sample, rhythm)]`` episode starts for one record."""
    parts, events = [], []
    pos = 0
    total = int(round(seconds * fs))
    while pos < total:
        rhythm = RHYTHMS[rng.choice(len(RHYTHMS), p=_WEIGHTS)]
        dur = min(rng.uniform(16, 40), (total - pos) / fs)
        seg = episode(rhythm, dur, fs, rng)
        if seg.size == 0:
            break
        events.append((pos, rhythm))
        parts.append(seg)
        pos += seg.size
    return np.concatenate(parts)[:total], events


def write_synthetic_db(directory, n_records=12, seconds=120.0, seed=0, fs=250.0):
    """Write ``n_records`` WFDB records (format 212, ``.atr`` rhythm annotations).

    Names alternate between ``cuNN`` and ``4NN`` styles. Returns the names.
    """
    os.makedirs(directory, exist_ok=True)
    rng = np.random.default_rng(seed)
    names = []
    for i in range(n_records):
        name = f"cu{i + 1:02d}" if i % 2 == 0 else f"4{i + 1:02d}"
        x, events = make_record(rng, seconds, fs)
        digital = np.clip(np.round(x * 200.0), -2048, 2047).astype(np.int64)
        wfdb.write_record(directory, name, digital, fs)
        anns = [wfdb.Annotation(s, wfdb.RHYTHM, aux="(" + r) for s, r in events]
        wfdb.write_annotations(os.path.join(directory, name + ".atr"), anns)
        names.append(name)
    return names
