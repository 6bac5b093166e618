# Copyright (c) 2026 the rowcol authors
# SPDX-License-Identifier: Apache-2.0
"""Regenerate the synthetic 32x32 test images in data/.

The images are procedurally generated (no external sources) and committed to
the repository; run this script only when changing them.
"""

import math
import os

SIZE = 32


def write_pgm(path, img):
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (SIZE, SIZE))
        f.write(bytes(min(255, max(0, int(round(v * 255)))) for row in img for v in row))


def flower():
    img = [[0.06 for _ in range(SIZE)] for _ in range(SIZE)]
    cx = cy = (SIZE - 1) / 2.0
    for i in range(SIZE):
        for j in range(SIZE):
            dx, dy = j - cx, i - cy
            r = math.hypot(dx, dy)
            ang = math.atan2(dy, dx)
            petal = 0.55 + 0.45 * math.cos(5.0 * ang)
            edge = 11.5 * petal
            if r < edge:
                v = 0.35 + 0.65 * (1.0 - r / max(edge, 1e-9))
                img[i][j] = max(img[i][j], min(1.0, v))
            if r < 2.5:
                img[i][j] = 1.0
    return img


def moon():
    img = [[0.04 for _ in range(SIZE)] for _ in range(SIZE)]
    cx, cy, rad = 14.0, 15.0, 11.0
    craters = [(9, 10, 2.5), (18, 13, 3.0), (13, 20, 2.0), (20, 21, 1.5)]
    for i in range(SIZE):
        for j in range(SIZE):
            r = math.hypot(j - cx, i - cy)
            if r < rad:
                shade = 0.95 - 0.35 * (j - (cx - rad)) / (2 * rad)
                for ci, cj, cr in craters:
                    d = math.hypot(j - cj, i - ci)
                    if d < cr:
                        shade -= 0.35 * (1.0 - d / cr)
                edge = min(1.0, (rad - r) / 1.5)
                img[i][j] = max(0.04, min(1.0, shade * (0.4 + 0.6 * edge)))
    return img


def coins():
    img = [[0.05 for _ in range(SIZE)] for _ in range(SIZE)]
    coins_at = [(8, 8, 5.0, 1.00), (9, 22, 4.0, 0.85), (22, 10, 4.5, 0.92),
                (23, 24, 3.5, 0.75), (16, 16, 2.5, 0.65)]
    for ci, cj, cr, bright in coins_at:
        for i in range(SIZE):
            for j in range(SIZE):
                d = math.hypot(j - cj, i - ci)
                if d < cr:
                    rim = 1.0 if d < cr - 1.2 else 0.55
                    img[i][j] = max(img[i][j], bright * rim * (0.8 + 0.2 * (1 - d / cr)))
    return img


def main():
    out = os.path.join(os.path.dirname(__file__), "..", "data")
    os.makedirs(out, exist_ok=True)
    write_pgm(os.path.join(out, "flower32.pgm"), flower())
    write_pgm(os.path.join(out, "moon32.pgm"), moon())
    write_pgm(os.path.join(out, "coins32.pgm"), coins())
    print("wrote flower32.pgm moon32.pgm coins32.pgm")


if __name__ == "__main__":
    main()
