"""Regenerate the bundled reference S11 traces in src/ondr/data/.

Each trace is two half-parabolas (in dB) meeting at the reported minimum and
passing through -10 dB exactly at the reported band edges, clipped at -0.3 dB
away from resonance. Sampled every 0.1 MHz from 880 to 950 MHz.
"""

from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "ondr" / "data"

TRACES = {
    # name: (min_db, min_mhz, lo_mhz, hi_mhz, comment)
    "helix_simulated.s1p": (-12.16, 915.0, 908.6, 921.5, "helical tag antenna, design curve"),
    "helix_measured.s1p": (-13.74, 912.0, 906.0, 921.5, "helical tag antenna, measured in place"),
}


def s11(f, min_db, f0, lo, hi):
    edge = lo if f <= f0 else hi
    return max(min(min_db + (-10.0 - min_db) * ((f - f0) / (edge - f0)) ** 2, -0.3), -60.0)


def render(min_db, f0, lo, hi, comment):
    rows = [f"! {comment}", "! synthetic reference: -10 dB crossings at %.1f / %.1f MHz" % (lo, hi),
            "# MHZ S DB R 50"]
    for k in range(8800, 9501):
        f = k / 10
        rows.append(f"{f:.1f} {s11(f, min_db, f0, lo, hi):.4f} 0")
    return "\n".join(rows) + "\n"


if __name__ == "__main__":
    DATA.mkdir(parents=True, exist_ok=True)
    for name, spec in TRACES.items():
        (DATA / name).write_text(render(*spec))
        print("wrote", DATA / name)
