#!/usr/bin/env python3
"""Writes the 64x64 PPM pair used by the color-transfer tests.

subject.ppm    summer landscape: sky, sun, green hills, soil
reference.ppm  winter scene: pale sky, snow, dark conifers

Both get mild per-pixel texture so the color clouds are not a handful of
points. Output is deterministic.
"""

import argparse
import math
import random
from pathlib import Path

SIZE = 64


def clamp(v):
    return max(0, min(255, int(round(v))))


def write_ppm(path, pixels):
    header = f"P6\n{SIZE} {SIZE}\n255\n".encode()
    body = bytes(clamp(c) for row in pixels for px in row for c in px)
    path.write_bytes(header + body)


def lerp(a, b, t):
    return tuple(x + (y - x) * t for x, y in zip(a, b))


def subject(rng):
    img = []
    for r in range(SIZE):
        row = []
        for c in range(SIZE):
            hill = 34 + 6 * math.sin(c / 9.0) + 3 * math.sin(c / 3.7)
            if r < hill:
                px = lerp((60, 120, 215), (170, 205, 240), r / hill)
                if (r - 12) ** 2 + (c - 48) ** 2 < 36:
                    px = (250, 220, 90)
            elif r < 52:
                px = lerp((70, 160, 60), (35, 105, 40), (r - hill) / (52 - hill))
            else:
                px = (120, 85, 50)
            n = rng.gauss(0, 8)
            row.append(tuple(x + n + rng.gauss(0, 3) for x in px))
        img.append(row)
    return img


def reference(rng):
    img = []
    for r in range(SIZE):
        row = []
        for c in range(SIZE):
            ridge = 28 + 5 * math.cos(c / 8.0)
            if r < ridge:
                px = lerp((150, 175, 205), (215, 225, 235), r / ridge)
            else:
                px = lerp((235, 240, 248), (190, 200, 220), (r - ridge) / (SIZE - ridge))
            # Conifers: narrow triangles standing on the snow line.
            for base in (8, 21, 37, 55):
                top = ridge - 14
                if top <= r <= ridge + 6 and abs(c - base) <= (r - top) * 0.35:
                    px = (30, 55, 45)
            n = rng.gauss(0, 6)
            row.append(tuple(x + n + rng.gauss(0, 3) for x in px))
        img.append(row)
    return img


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path, default=Path(__file__).resolve().parent.parent / "tests" / "data")
    ap.add_argument("--seed", type=int, default=17)
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)
    write_ppm(args.out_dir / "subject.ppm", subject(rng))
    write_ppm(args.out_dir / "reference.ppm", reference(rng))


if __name__ == "__main__":
    main()
