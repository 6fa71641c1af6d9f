"""Muscle signal front-ends: synthetic EMG and the strain/pressure switch.

EMG here is analysis material, not a control input. Surface EMG is
noise-like, so traces are synthesized as zero-mean Gaussian noise whose
standard deviation equals a per-electrode envelope amplitude in microvolts.
The built-in reference profile encodes the qualitative signature this
device's design is based on: under arm stress the forearm electrodes S1 and
S3 drop sharply while S4 stays flat (S2 carries no decision weight).

The production sensing path is a pressure transducer over the muscle,
turned into a clean digital switch by a hysteresis comparator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np


class WindowOutOfBounds(Exception):
    """Requested feature window does not fit inside the trace."""


class DegenerateBaseline(Exception):
    """A baseline RMS used by the classifier is zero."""


class InvalidThresholds(Exception):
    """Hysteresis thresholds are not ordered threshold_off < threshold_on."""


class Position(Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    S4 = "S4"


class Condition(Enum):
    RELAXED = "Relaxed"
    STRESSED = "Stressed"
    UNKNOWN = "Unknown"


@dataclass(frozen=True, eq=False)
class EmgTrace:
    """Sampled microvolt signal for one electrode position and condition."""

    position: Position
    condition: Condition
    sample_rate_hz: float
    samples: np.ndarray

    def __post_init__(self) -> None:
        if self.sample_rate_hz <= 0:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))
        if self.samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must be finite")


@dataclass(frozen=True)
class EmgFeatures:
    """Window features in microvolt units: RMS, MAV, variance, mean."""

    rms_uv: float
    mav_uv: float
    variance_uv2: float
    mean_uv: float


@dataclass(frozen=True, eq=False)
class PressureTrace:
    """Sampled muscle pressure in kPa."""

    sample_rate_hz: float
    samples: np.ndarray

    def __post_init__(self) -> None:
        if self.sample_rate_hz <= 0:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))
        if self.samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if self.samples.size and (not np.all(np.isfinite(self.samples)) or self.samples.min() < 0):
            raise ValueError("pressure samples must be finite and nonnegative")


@dataclass(frozen=True)
class EmgProfile:
    """Synthesis envelope: (relaxed_uv, stressed_uv) per electrode position.

    duration_s and sample_rate_hz fix the trace length; seed makes every
    (position, condition) stream reproducible.
    """

    amplitudes_uv: Mapping[Position, tuple[float, float]] = field(
        default_factory=lambda: dict(_REFERENCE_AMPLITUDES)
    )
    seed: int = 0
    duration_s: float = 30.029
    sample_rate_hz: float = 1000.0

    def __post_init__(self) -> None:
        if self.duration_s <= 0 or self.sample_rate_hz <= 0:
            raise ValueError("duration_s and sample_rate_hz must be positive")
        for pos in Position:
            if pos not in self.amplitudes_uv:
                raise ValueError(f"profile is missing an amplitude pair for {pos.value}")
            relaxed, stressed = self.amplitudes_uv[pos]
            if relaxed < 0 or stressed < 0:
                raise ValueError(f"amplitudes for {pos.value} must be nonnegative")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.sample_rate_hz))


# Relaxed is strong everywhere; stress collapses S1/S3 and leaves S4 flat.
# Synthetic values shaped to that qualitative relation, not measured data.
_REFERENCE_AMPLITUDES: dict[Position, tuple[float, float]] = {
    Position.S1: (80.0, 30.0),
    Position.S2: (80.0, 75.0),
    Position.S3: (80.0, 30.0),
    Position.S4: (80.0, 80.0),
}

REFERENCE_PROFILE = EmgProfile()

DEFAULT_DROP_RATIO = 0.6
DEFAULT_TOLERANCE_RATIO = 0.15


def synthesize_emg(profile: EmgProfile, position: Position, condition: Condition) -> EmgTrace:
    """Generate one noise trace for (position, condition) from the profile.

    Zero-mean Gaussian samples with standard deviation equal to the envelope
    amplitude, so the trace RMS concentrates on the amplitude. Deterministic:
    the stream is keyed on (seed, position, condition).
    """
    if condition is Condition.UNKNOWN:
        raise ValueError("cannot synthesize an Unknown-condition trace")
    relaxed, stressed = profile.amplitudes_uv[position]
    amplitude = relaxed if condition is Condition.RELAXED else stressed
    pos_key = list(Position).index(position)
    cond_key = 0 if condition is Condition.RELAXED else 1
    rng = np.random.default_rng([profile.seed, pos_key, cond_key])
    samples = rng.standard_normal(profile.n_samples) * amplitude
    return EmgTrace(position, condition, profile.sample_rate_hz, samples)


def window_features(trace: EmgTrace, start: int, length: int) -> EmgFeatures:
    """RMS, mean absolute value, variance, and mean over a sample window."""
    if length < 1:
        raise WindowOutOfBounds(f"window length must be >= 1, got {length}")
    if start < 0 or start + length > trace.samples.size:
        raise WindowOutOfBounds(
            f"window [{start}, {start + length}) outside trace of {trace.samples.size} samples"
        )
    w = trace.samples[start : start + length]
    mean = float(np.mean(w))
    rms = float(np.sqrt(np.mean(np.square(w))))
    mav = float(np.mean(np.abs(w)))
    variance = float(np.var(w))
    return EmgFeatures(rms_uv=rms, mav_uv=mav, variance_uv2=variance, mean_uv=mean)


def trace_features(trace: EmgTrace) -> EmgFeatures:
    """Features over the whole trace."""
    return window_features(trace, 0, trace.samples.size)


def classify_stress(
    features_by_position: Mapping[Position, EmgFeatures],
    baseline_by_position: Mapping[Position, EmgFeatures],
    drop_ratio: float = DEFAULT_DROP_RATIO,
    tolerance_ratio: float = DEFAULT_TOLERANCE_RATIO,
) -> Condition:
    """Label a set of per-position features Stressed or Relaxed.

    Stressed means the S1 and S3 RMS both dropped to at most drop_ratio of
    baseline while S4 stayed within tolerance_ratio of baseline. S2 carries
    no decision weight. The rule only uses RMS ratios, so scaling every trace
    by a common factor cannot change the outcome.
    """
    ratios: dict[Position, float] = {}
    for pos in (Position.S1, Position.S3, Position.S4):
        base = baseline_by_position[pos].rms_uv
        if base == 0:
            raise DegenerateBaseline(f"baseline RMS is zero at {pos.value}")
        ratios[pos] = features_by_position[pos].rms_uv / base
    stressed = (
        ratios[Position.S1] <= drop_ratio
        and ratios[Position.S3] <= drop_ratio
        and abs(ratios[Position.S4] - 1.0) <= tolerance_ratio
    )
    return Condition.STRESSED if stressed else Condition.RELAXED


def _hysteresis(samples: Iterable[float], threshold_on: float, threshold_off: float) -> list[bool]:
    # Two-threshold comparator; values inside (off, on) hold the last state.
    out: list[bool] = []
    state = False
    for v in samples:
        if state:
            if v <= threshold_off:
                state = False
        elif v >= threshold_on:
            state = True
        out.append(state)
    return out


def strain_to_switch(
    trace: PressureTrace, threshold_on: float, threshold_off: float
) -> list[bool]:
    """Convert a pressure trace into a digital switch stream.

    The switch turns on at the first sample at or above threshold_on and off
    at the first later sample at or below threshold_off; it starts off. The
    band between the thresholds holds the current state, which is what keeps
    a noisy pressure signal from chattering the switch.
    """
    if threshold_off >= threshold_on:
        raise InvalidThresholds(
            f"threshold_off={threshold_off} must be below threshold_on={threshold_on}"
        )
    return _hysteresis(trace.samples, threshold_on, threshold_off)


def rolling_rms(samples: np.ndarray, window: int) -> np.ndarray:
    """Trailing-window RMS per sample (window truncated at the start)."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    sq = np.square(np.asarray(samples, dtype=np.float64))
    n = sq.size
    if n == 0:
        return np.empty(0)
    w = min(window, n)
    out = np.empty(n)
    out[:w] = np.cumsum(sq[:w]) / np.arange(1, w + 1)
    if n >= w:
        windows = np.lib.stride_tricks.sliding_window_view(sq, w)
        out[w - 1 :] = windows.mean(axis=1)
    return np.sqrt(out)


# ---------------------------------------------------------------------------
# Trace CSV files: "# key=value" comment header, then sample_index,value rows.

def write_trace_csv(
    path: str | Path,
    samples: Sequence[float] | np.ndarray,
    sample_rate_hz: float,
    units: str,
    extra_meta: Mapping[str, str] | None = None,
) -> None:
    lines = [f"# sample_rate_hz={sample_rate_hz:.9g}", f"# units={units}"]
    for key, value in (extra_meta or {}).items():
        lines.append(f"# {key}={value}")
    lines.append("sample_index,value")
    for i, v in enumerate(samples):
        lines.append(f"{i},{format(float(v), '.9g')}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace_csv(path: str | Path) -> tuple[np.ndarray, float, dict[str, str]]:
    """Returns (samples, sample_rate_hz, metadata) from a trace CSV."""
    meta: dict[str, str] = {}
    values: list[float] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    meta[key.strip()] = val.strip()
                continue
            if line.startswith("sample_index"):
                continue
            _, _, val = line.partition(",")
            values.append(float(val))
    if "sample_rate_hz" not in meta:
        raise ValueError(f"{path}: missing '# sample_rate_hz=' header")
    return np.array(values, dtype=np.float64), float(meta["sample_rate_hz"]), meta


def write_emg_trace(path: str | Path, trace: EmgTrace) -> None:
    write_trace_csv(
        path,
        trace.samples,
        trace.sample_rate_hz,
        units="uV",
        extra_meta={"position": trace.position.value, "condition": trace.condition.value},
    )


def read_emg_trace(path: str | Path) -> EmgTrace:
    samples, rate, meta = read_trace_csv(path)
    position = Position(meta.get("position", Path(path).stem.upper()[:2] or "S1"))
    condition = Condition(meta.get("condition", "Unknown"))
    return EmgTrace(position, condition, rate, samples)


def read_pressure_trace(path: str | Path) -> PressureTrace:
    samples, rate, _ = read_trace_csv(path)
    return PressureTrace(rate, samples)


def synthesize_profile_set(profile: EmgProfile) -> dict[Condition, dict[Position, EmgTrace]]:
    """All eight traces of a profile, keyed by condition then position."""
    return {
        cond: {pos: synthesize_emg(profile, pos, cond) for pos in Position}
        for cond in (Condition.RELAXED, Condition.STRESSED)
    }


def rms_to_switch(
    samples: np.ndarray, window: int, threshold_on: float, threshold_off: float
) -> list[bool]:
    """Experimental alternate sensor: hysteresis over a trailing RMS stream."""
    if threshold_off >= threshold_on:
        raise InvalidThresholds(
            f"threshold_off={threshold_off} must be below threshold_on={threshold_on}"
        )
    return _hysteresis(rolling_rms(samples, window), threshold_on, threshold_off)


def load_trace_dir(directory: str | Path) -> dict[Position, EmgTrace]:
    """Load one trace per position (S1.csv .. S4.csv) from a directory."""
    directory = Path(directory)
    traces: dict[Position, EmgTrace] = {}
    for path in sorted(directory.glob("*.csv")):
        trace = read_emg_trace(path)
        if trace.position in traces:
            raise ValueError(f"{directory}: duplicate trace for {trace.position.value}")
        traces[trace.position] = trace
    missing = [pos.value for pos in Position if pos not in traces]
    if missing:
        raise ValueError(f"{directory}: missing traces for {', '.join(missing)}")
    return traces
