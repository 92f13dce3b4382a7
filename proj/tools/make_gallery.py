#!/usr/bin/env python3
# SPDX-FileCopyrightText: 2026 CIDN Authors
# SPDX-License-Identifier: Apache-2.0
"""Regenerates the bundled guidance gallery: one synthetic scene at several exposures and tints."""

import pathlib

import numpy as np
from PIL import Image

OUT = pathlib.Path(__file__).resolve().parent.parent / "assets" / "gallery"
SIZE = 192

# (name, exposure, rgb tint)
LOOKS = [
    ("dusk", 0.30, (0.85, 0.90, 1.10)),
    ("overcast", 0.50, (0.95, 1.00, 1.05)),
    ("neutral", 0.70, (1.00, 1.00, 1.00)),
    ("warm", 0.80, (1.10, 1.00, 0.85)),
    ("daylight", 1.00, (1.00, 1.00, 1.00)),
]


def scene(seed=7):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:SIZE, 0:SIZE] / SIZE
    img = np.zeros((SIZE, SIZE, 3))
    for c in range(3):
        f = rng.uniform(1, 4, size=2)
        img[..., c] = 0.5 + 0.25 * np.sin(2 * np.pi * (f[0] * xx + rng.uniform())) * np.cos(2 * np.pi * f[1] * yy)
    for _ in range(6):
        cy, cx, r = rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.05, 0.2)
        blob = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * r * r))
        img += blob[..., None] * rng.uniform(-0.3, 0.4, size=3)
    return np.clip(img, 0.0, 1.0)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    base = scene()
    for name, exposure, tint in LOOKS:
        img = np.clip(base * exposure * np.array(tint), 0.0, 1.0)
        Image.fromarray((img * 255 + 0.5).astype(np.uint8)).save(OUT / f"{name}.png")


if __name__ == "__main__":
    main()
