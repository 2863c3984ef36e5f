"""Pressure sensor wire protocol and stream emulator.

The prototype board streams six 10-bit face pressures at 10 Hz. The wire
format is one ASCII line per frame:

    P <seq> <t_ms> <v0> <v1> <v2> <v3> <v4> <v5>\\n

Face order is volume-local: 0:+X 1:-X 2:+Y 3:-Y 4:+Z 5:-Z.
"""

from __future__ import annotations

from dataclasses import dataclass, field

RAW_MAX = 1023
FRAME_TAG = b"P"
SAMPLE_PERIOD_MS = 100  # 10 Hz


class FrameError(ValueError):
    pass


@dataclass(frozen=True)
class PressureFrame:
    seq: int
    t: int  # milliseconds since stream start
    raw: tuple[int, int, int, int, int, int]

    def __post_init__(self):
        if not (0 <= self.seq < 2**32):
            raise FrameError(f"seq {self.seq} outside unsigned 32-bit range")
        if self.t < 0:
            raise FrameError(f"negative timestamp {self.t}")
        if len(self.raw) != 6:
            raise FrameError(f"expected 6 channels, got {len(self.raw)}")
        for v in self.raw:
            if not (0 <= v <= RAW_MAX):
                raise FrameError(f"raw value {v} outside [0, {RAW_MAX}]")
        object.__setattr__(self, "raw", tuple(int(v) for v in self.raw))


@dataclass(frozen=True)
class Calibration:
    baseline: tuple[int, ...] = (0,) * 6
    span: tuple[int, ...] = (RAW_MAX,) * 6

    def __post_init__(self):
        if len(self.baseline) != 6 or len(self.span) != 6:
            raise ValueError("calibration needs 6 baselines and 6 spans")
        for b, s in zip(self.baseline, self.span):
            if not (0 <= b <= RAW_MAX):
                raise ValueError(f"baseline {b} outside [0, {RAW_MAX}]")
            if s <= 0:
                raise ValueError(f"span {s} must be positive")
            if b + s > RAW_MAX:
                raise ValueError(f"baseline {b} + span {s} exceeds {RAW_MAX}")


DEFAULT_CALIBRATION = Calibration()


def encode_frame(frame: PressureFrame) -> bytes:
    vals = " ".join(str(v) for v in frame.raw)
    return f"P {frame.seq} {frame.t} {vals}\n".encode("ascii")


def parse_frame(line: bytes) -> PressureFrame:
    """Inverse of encode_frame; raises FrameError naming the defect."""
    if isinstance(line, str):
        line = line.encode("ascii", errors="replace")
    fields = line.strip().split(b" ")
    if not fields or fields[0] != FRAME_TAG:
        raise FrameError(f"bad frame tag {fields[0]!r}" if fields else "empty line")
    if len(fields) != 9:
        raise FrameError(f"expected 9 fields, got {len(fields)}")
    try:
        nums = [int(f) for f in fields[1:]]
    except ValueError:
        raise FrameError(f"non-numeric field in {line!r}") from None
    return PressureFrame(seq=nums[0], t=nums[1], raw=tuple(nums[2:]))


class LineReassembler:
    """Splits a byte stream into frames, resynchronizing at newlines.

    Feed arbitrary chunks; get back (frames, errors). A malformed line
    costs exactly one error and never corrupts the following frames.
    """

    def __init__(self):
        self._buf = b""

    def feed(self, chunk: bytes) -> tuple[list[PressureFrame], list[FrameError]]:
        self._buf += chunk
        frames: list[PressureFrame] = []
        errors: list[FrameError] = []
        while b"\n" in self._buf:
            line, self._buf = self._buf.split(b"\n", 1)
            if not line:
                continue
            try:
                frames.append(parse_frame(line))
            except FrameError as e:
                errors.append(e)
        return frames, errors


def normalize(frame: PressureFrame, calibration: Calibration = DEFAULT_CALIBRATION) -> list[float]:
    """Six normalized pressures in [0, 1]."""
    return [
        min(1.0, max(0.0, (v - b) / s))
        for v, b, s in zip(frame.raw, calibration.baseline, calibration.span)
    ]


@dataclass
class Envelope:
    """Scripted per-face pressure curves: breakpoints (time s, value 0..1),
    linearly interpolated, held constant outside the breakpoint range."""

    faces: dict[int, list[tuple[float, float]]] = field(default_factory=dict)

    def __post_init__(self):
        for face, pts in self.faces.items():
            if not (0 <= face <= 5):
                raise ValueError(f"face index {face} outside 0..5")
            times = [t for t, _ in pts]
            if times != sorted(times):
                raise ValueError(f"face {face}: breakpoint times must be nondecreasing")
            for _, v in pts:
                if not (0.0 <= v <= 1.0):
                    raise ValueError(f"face {face}: value {v} outside [0, 1]")

    def value(self, face: int, t: float) -> float:
        pts = self.faces.get(face)
        if not pts:
            return 0.0
        if t <= pts[0][0]:
            return pts[0][1]
        if t >= pts[-1][0]:
            return pts[-1][1]
        for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
            if t0 <= t <= t1:
                if t1 == t0:
                    return v1
                return v0 + (v1 - v0) * (t - t0) / (t1 - t0)
        return pts[-1][1]

    @classmethod
    def from_dict(cls, doc: dict) -> "Envelope":
        return cls({int(k): [(float(t), float(v)) for t, v in pts] for k, pts in doc.items()})


def emulate_stream(
    envelope: Envelope,
    duration: float,
    calibration: Calibration = DEFAULT_CALIBRATION,
) -> list[PressureFrame]:
    """Sample the envelope at exactly 10 Hz: floor(10*duration) frames,
    seq consecutive from 0, t = seq * 100 ms."""
    n = int(duration * 10 + 1e-9)
    frames = []
    for seq in range(n):
        t_ms = seq * SAMPLE_PERIOD_MS
        t_s = t_ms / 1000.0
        raw = tuple(
            min(RAW_MAX, calibration.baseline[f] + round(envelope.value(f, t_s) * calibration.span[f]))
            for f in range(6)
        )
        frames.append(PressureFrame(seq=seq, t=t_ms, raw=raw))
    return frames
