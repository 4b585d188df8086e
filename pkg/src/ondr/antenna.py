"""One-port Touchstone (v1) parsing and S11 match-band analysis."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    EmptyTrace,
    MalformedOptionLine,
    MalformedRow,
    NonMonotoneFrequency,
    UnsupportedVersion,
)

_UNIT_TO_MHZ = {"HZ": 1e-6, "KHZ": 1e-3, "MHZ": 1.0, "GHZ": 1e3}
_FORMATS = {"DB", "MA", "RI"}


@dataclass(frozen=True)
class SParamTrace:
    freqs: tuple[float, ...]
    s11: tuple[float, ...]

    def __post_init__(self):
        if len(self.freqs) != len(self.s11):
            raise ValueError("frequency and S11 columns differ in length")
        if len(self.freqs) < 2:
            raise EmptyTrace(f"need at least 2 points, got {len(self.freqs)}")
        for a, b in zip(self.freqs, self.freqs[1:]):
            if not b > a:
                raise NonMonotoneFrequency(f"frequency {b} MHz follows {a} MHz")
        if not all(math.isfinite(v) for v in self.s11):
            raise MalformedRow("S11 values must be finite")

    @classmethod
    def from_points(cls, points) -> "SParamTrace":
        points = list(points)
        return cls(tuple(float(f) for f, _ in points), tuple(float(v) for _, v in points))

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.freqs, self.s11))


@dataclass(frozen=True)
class AntennaSummary:
    min_s11: float
    min_freq: float
    bands: tuple[tuple[float, float], ...]
    threshold: float

    @property
    def widths(self) -> list[float]:
        return [hi - lo for lo, hi in self.bands]

    @property
    def total_width(self) -> float:
        return sum(self.widths)


def _parse_options(tokens, lineno):
    unit, param, fmt, z0 = "GHZ", "S", "MA", 50.0
    i = 0
    while i < len(tokens):
        tok = tokens[i].upper()
        if tok in _UNIT_TO_MHZ:
            unit = tok
        elif tok in ("S", "Y", "Z", "H", "G"):
            param = tok
        elif tok in _FORMATS:
            fmt = tok
        elif tok == "R":
            if i + 1 >= len(tokens):
                raise MalformedOptionLine(f"line {lineno}: R without a reference impedance")
            try:
                z0 = float(tokens[i + 1])
            except ValueError:
                raise MalformedOptionLine(f"line {lineno}: bad impedance {tokens[i + 1]!r}") from None
            i += 1
        else:
            raise MalformedOptionLine(f"line {lineno}: unknown option {tokens[i]!r}")
        i += 1
    if param != "S":
        raise MalformedOptionLine(f"line {lineno}: only S parameters are supported, got {param}")
    return unit, fmt, z0


def _to_db(fmt, a, b):
    if fmt == "DB":
        return a
    mag = abs(a) if fmt == "MA" else math.hypot(a, b)
    if mag == 0:
        return -math.inf
    return 20.0 * math.log10(mag)


def parse_touchstone(text: str) -> SParamTrace:
    """Parse a one-port .s1p document into a dB-magnitude trace in MHz.

    Angle/imaginary columns are read but only contribute to the magnitude.
    """
    unit, fmt = "GHZ", "MA"
    seen_options = False
    freqs, vals = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            raise UnsupportedVersion(f"line {lineno}: Touchstone v2 keyword {line.split()[0]!r}")
        if line.startswith("#"):
            if seen_options:
                continue  # later option lines are ignored per Touchstone v1
            unit, fmt, _ = _parse_options(line[1:].split(), lineno)
            seen_options = True
            continue
        cols = line.split()
        need = 2 if fmt == "DB" else 3
        if len(cols) < need or len(cols) > 3:
            raise MalformedRow(f"line {lineno}: expected {need}-3 columns, got {len(cols)}")
        try:
            nums = [float(c) for c in cols]
        except ValueError:
            raise MalformedRow(f"line {lineno}: non-numeric value in {raw.strip()!r}") from None
        db = _to_db(fmt, nums[1], nums[2] if len(nums) > 2 else 0.0)
        if not math.isfinite(db):
            raise MalformedRow(f"line {lineno}: zero magnitude has no dB value")
        f = nums[0] * _UNIT_TO_MHZ[unit]
        if freqs and not f > freqs[-1]:
            raise NonMonotoneFrequency(f"line {lineno}: {f} MHz after {freqs[-1]} MHz")
        freqs.append(f)
        vals.append(db)
    if len(freqs) < 2:
        raise EmptyTrace(f"need at least 2 data rows, got {len(freqs)}")
    return SParamTrace(tuple(freqs), tuple(vals))


def render_touchstone(trace: SParamTrace, precision: int = 6) -> str:
    lines = ["# MHZ S DB R 50"]
    for f, v in trace.points:
        lines.append(f"{f:.{precision}f} {v:.{precision}f} 0")
    return "\n".join(lines) + "\n"


def min_s11(trace: SParamTrace) -> tuple[float, float]:
    """(frequency, dB) of the deepest sample; the lowest frequency wins ties."""
    i = min(range(len(trace.s11)), key=lambda k: (trace.s11[k], k))
    return trace.freqs[i], trace.s11[i]


def _crossing(f0, v0, f1, v1, threshold):
    if v0 == threshold:
        return f0
    if v1 == threshold:
        return f1
    return f0 + (threshold - v0) * (f1 - f0) / (v1 - v0)


def bandwidth_below(trace: SParamTrace, threshold: float = -10.0) -> list[tuple[float, float]]:
    """Frequency intervals where the linearly interpolated S11 is strictly below ``threshold``."""
    f, v = trace.freqs, trace.s11
    bands = []
    lo = f[0] if v[0] < threshold else None
    for i in range(len(f) - 1):
        f0, v0, f1, v1 = f[i], v[i], f[i + 1], v[i + 1]
        if lo is None and v1 < threshold:
            lo = _crossing(f0, v0, f1, v1, threshold) if v0 >= threshold else f0
        elif lo is not None and v1 >= threshold:
            bands.append((lo, _crossing(f0, v0, f1, v1, threshold)))
            lo = None
    if lo is not None:
        bands.append((lo, f[-1]))
    return bands


def summarize(trace: SParamTrace, threshold: float = -10.0) -> AntennaSummary:
    freq, db = min_s11(trace)
    return AntennaSummary(db, freq, tuple(bandwidth_below(trace, threshold)), threshold)


def format_summary(summary: AntennaSummary) -> str:
    """Aligned human-readable block followed by one machine-readable line per band."""
    out = [
        f"{'min S11':<12}{summary.min_s11:>10.2f} dB",
        f"{'at':<12}{summary.min_freq:>10.2f} MHz",
        f"{'threshold':<12}{summary.threshold:>10.2f} dB",
    ]
    if not summary.bands:
        out.append(f"{'bands':<12}{'none':>10}")
    for lo, hi in summary.bands:
        out.append(f"{'band':<12}{lo:>10.2f} - {hi:.2f} MHz  width {hi - lo:.2f} MHz")
    rows = summary.bands or ((None, None),)
    for lo, hi in rows:
        fields = [f"min_db={summary.min_s11:.6g}", f"min_mhz={summary.min_freq:.6g}"]
        if lo is not None:
            fields += [f"band_lo={lo:.6f}", f"band_hi={hi:.6f}", f"width={hi - lo:.6f}"]
        out.append(" ".join(fields))
    return "\n".join(out) + "\n"
