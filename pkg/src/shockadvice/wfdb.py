"""Minimal WFDB reader/writer: text headers, format 212/16 signals, MIT annotations."""

import logging
import os
import re
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

SUPPORTED_FORMATS = (212, 16)
DEFAULT_GAIN = 200.0

# Annotation type codes (ecgcodes.h) that matter for rhythm bookkeeping.
NOISE = 14
NOTE = 22
RHYTHM = 28
VFON = 32
VFOFF = 33
SKIP = 59
NUM = 60
SUB = 61
CHN = 62
AUX = 63

ANNOTATION_SYMBOLS = {
    0: " ", 1: "N", 2: "L", 3: "R", 4: "a", 5: "V", 6: "F", 7: "J", 8: "A", 9: "S",
    10: "E", 11: "j", 12: "/", 13: "Q", 14: "~", 16: "|", 18: "s", 19: "T", 20: "*",
    21: "D", 22: '"', 23: "=", 24: "p", 25: "B", 26: "^", 27: "t", 28: "+", 29: "u",
    30: "?", 31: "!", 32: "[", 33: "]", 34: "e", 35: "n", 36: "@", 37: "x", 38: "f",
    39: "(", 40: ")", 41: "r",
}


class WfdbFormatError(ValueError):
    """Raised for malformed headers or unsupported signal encodings."""


@dataclass
class SignalSpec:
    file_name: str
    fmt: int
    gain: float = DEFAULT_GAIN
    baseline: int = 0
    units: str = "mV"
    adc_res: int = 12
    adc_zero: int = 0
    init_value: int = 0
    checksum: int | None = None
    byte_offset: int = 0
    description: str = ""


@dataclass
class Header:
    record_name: str
    n_signals: int
    fs: float
    n_samples: int | None
    signals: list[SignalSpec] = field(default_factory=list)


@dataclass
class Annotation:
    sample: int
    code: int
    subtype: int = 0
    chan: int = 0
    num: int = 0
    aux: str = ""

    @property
    def symbol(self):
        return ANNOTATION_SYMBOLS.get(self.code, f"[{self.code}]")


_GAIN_RE = re.compile(r"^([-+0-9.eE]+)(?:\(([-+0-9]+)\))?(?:/(\S+))?$")


def _strip_comment_lines(text):
    return [ln for ln in (l.strip() for l in text.splitlines()) if ln and not ln.startswith("#")]


def parse_header(text):
    """Parse the contents of a ``.hea`` file."""
    lines = _strip_comment_lines(text)
    if not lines:
        raise WfdbFormatError("empty header")
    head = lines[0].split()
    if len(head) < 2:
        raise WfdbFormatError(f"record line too short: {lines[0]!r}")
    name = head[0].split("/")[0]
    try:
        n_sig = int(head[1])
        fs = float(re.split(r"[/(]", head[2])[0]) if len(head) > 2 else 250.0
        n_samples = int(head[3]) if len(head) > 3 else None
    except ValueError as exc:
        raise WfdbFormatError(f"bad record line: {lines[0]!r}") from exc
    if fs <= 0:
        raise WfdbFormatError(f"non-positive sampling frequency in {lines[0]!r}")

    signals = []
    for ln in lines[1:1 + n_sig]:
        parts = ln.split()
        if len(parts) < 2:
            raise WfdbFormatError(f"bad signal line: {ln!r}")
        fmt_field = parts[1]
        m = re.match(r"^(\d+)(?:x\d+)?(?::\d+)?(?:\+(\d+))?$", fmt_field)
        if not m:
            raise WfdbFormatError(f"bad format field: {fmt_field!r}")
        spec = SignalSpec(file_name=parts[0], fmt=int(m.group(1)),
                          byte_offset=int(m.group(2) or 0))
        if len(parts) > 2:
            g = _GAIN_RE.match(parts[2])
            if not g:
                raise WfdbFormatError(f"bad gain field: {parts[2]!r}")
            gain = float(g.group(1))
            spec.gain = gain if gain != 0 else DEFAULT_GAIN
            if g.group(3):
                spec.units = g.group(3)
            baseline = g.group(2)
        else:
            baseline = None
        try:
            if len(parts) > 3:
                spec.adc_res = int(parts[3])
            if len(parts) > 4:
                spec.adc_zero = int(parts[4])
            if len(parts) > 5:
                spec.init_value = int(parts[5])
            if len(parts) > 6:
                spec.checksum = int(parts[6])
        except ValueError as exc:
            raise WfdbFormatError(f"bad signal line: {ln!r}") from exc
        spec.baseline = int(baseline) if baseline is not None else spec.adc_zero
        if len(parts) > 8:
            spec.description = " ".join(parts[8:])
        signals.append(spec)
    if len(signals) != n_sig:
        raise WfdbFormatError(f"header declares {n_sig} signals, found {len(signals)}")
    return Header(name, n_sig, fs, n_samples, signals)


def unpack_212(raw):
    """Unpack format-212 bytes into signed 12-bit integers.

    Each 3-byte group holds two samples: the first is the low 12 bits of the
    little-endian byte pair, the second takes the pair's top 4 bits as its
    high nibble and the third byte as its low byte.
    """
    raw = np.frombuffer(bytes(raw), dtype=np.uint8)
    n_groups = raw.size // 3
    b = raw[: 3 * n_groups].reshape(-1, 3).astype(np.int32)
    out = np.empty(2 * n_groups, dtype=np.int32)
    out[0::2] = b[:, 0] | ((b[:, 1] & 0x0F) << 8)
    out[1::2] = b[:, 2] | ((b[:, 1] & 0xF0) << 4)
    if raw.size - 3 * n_groups >= 2:
        tail = raw[3 * n_groups:].astype(np.int32)
        out = np.append(out, tail[0] | ((tail[1] & 0x0F) << 8))
    out[out > 2047] -= 4096
    return out


def pack_212(values):
    values = np.asarray(values, dtype=np.int64)
    if values.size and (values.min() < -2048 or values.max() > 2047):
        raise WfdbFormatError("value out of 12-bit range")
    v = values & 0xFFF
    if v.size % 2:
        v = np.append(v, 0)
    a, b = v[0::2], v[1::2]
    out = np.empty((a.size, 3), dtype=np.uint8)
    out[:, 0] = a & 0xFF
    out[:, 1] = ((a >> 8) & 0x0F) | (((b >> 8) & 0x0F) << 4)
    out[:, 2] = b & 0xFF
    return out.tobytes()


def _decode(raw, fmt):
    if fmt == 212:
        return unpack_212(raw)
    if fmt == 16:
        n = len(raw) // 2
        return np.frombuffer(bytes(raw[: 2 * n]), dtype="<i2").astype(np.int32)
    raise WfdbFormatError(f"unsupported signal format {fmt}")


def _as_int16(v):
    v = int(v) & 0xFFFF
    return v - 0x10000 if v >= 0x8000 else v


def checksum16(samples):
    """Sum of the samples modulo 2**16, as a signed 16-bit value."""
    return _as_int16(int(np.asarray(samples, dtype=np.int64).sum()))


def read_signals(header, directory):
    """Read all signals; returns an int array of shape (n_samples, n_signals)."""
    by_file = {}
    for idx, spec in enumerate(header.signals):
        if spec.fmt not in SUPPORTED_FORMATS:
            raise WfdbFormatError(f"unsupported signal format {spec.fmt}")
        by_file.setdefault(spec.file_name, []).append(idx)

    columns = [None] * header.n_signals
    for fname, idxs in by_file.items():
        fmt = header.signals[idxs[0]].fmt
        if any(header.signals[i].fmt != fmt for i in idxs):
            raise WfdbFormatError(f"mixed formats in {fname}")
        with open(os.path.join(directory, fname), "rb") as fh:
            fh.seek(header.signals[idxs[0]].byte_offset)
            raw = fh.read()
        flat = _decode(raw, fmt)
        n_frames = flat.size // len(idxs)
        if header.n_samples is not None:
            n_frames = min(n_frames, header.n_samples)
        frames = flat[: n_frames * len(idxs)].reshape(n_frames, len(idxs))
        for col, i in enumerate(idxs):
            columns[i] = frames[:, col]

    n = min(c.size for c in columns)
    data = np.stack([c[:n] for c in columns], axis=1)
    for i, spec in enumerate(header.signals):
        if spec.checksum is not None:
            got = checksum16(data[:, i])
            want = _as_int16(spec.checksum)
            if got != want:
                logger.warning("checksum mismatch for %s signal %d: header %d, data %d",
                               header.record_name, i, want, got)
    return data


def to_physical(digital, spec):
    return (np.asarray(digital, dtype=np.float64) - spec.baseline) / spec.gain


def read_annotations(path):
    """Read a MIT-format annotation file into a list of :class:`Annotation`."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) % 2:
        data = data[:-1]
    pairs = np.frombuffer(data, dtype="<u2")
    anns = []
    t = 0
    i = 0
    n = pairs.size
    cur = None
    while i < n:
        word = int(pairs[i])
        code = word >> 10
        value = word & 0x3FF
        if word == 0:
            break
        if code == SKIP:
            if i + 2 >= n:
                break
            hi, lo = int(pairs[i + 1]), int(pairs[i + 2])
            interval = (hi << 16) | lo
            if interval >= 1 << 31:
                interval -= 1 << 32
            t += interval
            i += 3
            continue
        if code == NUM:
            if cur is not None:
                cur.num = value
        elif code == SUB:
            if cur is not None:
                cur.subtype = value
        elif code == CHN:
            if cur is not None:
                cur.chan = value
        elif code == AUX:
            nbytes = value
            nwords = (nbytes + 1) // 2
            aux_raw = pairs[i + 1:i + 1 + nwords].astype("<u2").tobytes()[:nbytes]
            if cur is not None:
                cur.aux = aux_raw.decode("latin-1").rstrip("\x00")
            i += nwords
        elif code > AUX:
            pass
        else:
            t += value
            cur = Annotation(sample=t, code=code)
            anns.append(cur)
        i += 1
    return anns


def write_annotations(path, annotations):
    """Write annotations in MIT format (used for fixtures and synthetic data)."""
    words = []
    t = 0
    for ann in sorted(annotations, key=lambda a: a.sample):
        dt = ann.sample - t
        if dt > 1023 or dt < 0:
            words.append(SKIP << 10)
            u = dt & 0xFFFFFFFF
            words.extend([u >> 16, u & 0xFFFF])
            dt = 0
        words.append((ann.code << 10) | dt)
        t = ann.sample
        if ann.subtype:
            words.append((SUB << 10) | ann.subtype)
        if ann.chan:
            words.append((CHN << 10) | ann.chan)
        if ann.num:
            words.append((NUM << 10) | ann.num)
        if ann.aux:
            raw = ann.aux.encode("latin-1")
            words.append((AUX << 10) | len(raw))
            if len(raw) % 2:
                raw += b"\x00"
            words.extend(np.frombuffer(raw, dtype="<u2").tolist())
    words.append(0)
    with open(path, "wb") as fh:
        fh.write(np.asarray(words, dtype="<u2").tobytes())


def write_record(directory, name, digital, fs, fmt=212, gain=200.0, baseline=0, units="mV"):
    """Write a header plus one signal file; ``digital`` is (n_samples, n_signals) ints."""
    digital = np.asarray(digital, dtype=np.int64)
    if digital.ndim == 1:
        digital = digital[:, None]
    n, n_sig = digital.shape
    flat = digital.reshape(-1)
    if fmt == 212:
        payload = pack_212(flat)
    elif fmt == 16:
        payload = flat.astype("<i2").tobytes()
    else:
        raise WfdbFormatError(f"unsupported signal format {fmt}")
    dat = f"{name}.dat"
    with open(os.path.join(directory, dat), "wb") as fh:
        fh.write(payload)
    lines = [f"{name} {n_sig} {fs:g} {n}"]
    for s in range(n_sig):
        checksum = checksum16(digital[:, s])
        lines.append(f"{dat} {fmt} {gain:g}({baseline})/{units} 12 0 {int(digital[0, s])} "
                     f"{checksum} 0 ECG{s}")
    with open(os.path.join(directory, f"{name}.hea"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
