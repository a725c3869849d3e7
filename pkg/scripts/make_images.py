"""Regenerate the two bundled 128x128 test images in src/sggica/data/."""

from pathlib import Path

import numpy as np

from sggica.signal_io import SignalMatrix, write_pgm

SIZE = 128
OUT = Path(__file__).resolve().parent.parent / "src" / "sggica" / "data"


def rings(size=SIZE, seed=11):
    # bright sparse blobs and a ring on a dark background: right-skewed histogram
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:size, 0:size] / size
    img = 0.08 + 0.04 * y
    for _ in range(9):
        cx, cy = rng.uniform(0.1, 0.9, 2)
        r = rng.uniform(0.03, 0.09)
        img += rng.uniform(0.4, 0.9) * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * r * r))
    d = np.hypot(x - 0.55, y - 0.45)
    img += 0.5 * np.exp(-((d - 0.3) ** 2) / (2 * 0.015**2))
    return np.clip(img, 0.0, 1.0)


def weave(size=SIZE, seed=23):
    # smooth interfering waves with a dark diagonal band: broad, left-skewed histogram
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:size, 0:size] / size
    img = 0.6 + 0.15 * np.sin(2 * np.pi * (3 * x + 1.5 * y)) * np.cos(2 * np.pi * 2.2 * y)
    img -= 0.45 * np.exp(-((x + y - 1.1) ** 2) / (2 * 0.05**2))
    img += 0.03 * rng.standard_normal((size, size))
    return np.clip(img, 0.0, 1.0)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, img in (("rings.pgm", rings()), ("weave.pgm", weave())):
        write_pgm(SignalMatrix(img.ravel()), SIZE, SIZE, OUT / name)


if __name__ == "__main__":
    main()
