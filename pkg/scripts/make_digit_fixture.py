"""Regenerate tests/data/digit7.pgm, a 32x32 handwritten '7'.

scikit-learn's 8x8 digits are on-pixel counts over 4x4 blocks of 32x32
handwritten bitmaps.  Ordered (Bayer) dithering turns every count back into a
4x4 block with exactly that many set pixels, giving a 32x32 bitmap whose block
counts match the source.
"""

import sys
from pathlib import Path

import numpy as np
from sklearn.datasets import load_digits

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
from vqsvd.io import write_pgm  # noqa: E402

BAYER4 = np.array([[0, 8, 2, 10], [12, 4, 14, 6], [3, 11, 1, 9], [15, 7, 13, 5]])


def digit_bitmap(label=7):
    digits = load_digits()
    index = int(np.flatnonzero(digits.target == label)[0])
    counts = digits.images[index].astype(int)
    return np.kron(counts, np.ones((4, 4), dtype=int)) > np.tile(BAYER4, (8, 8))


def main(out=None):
    out = Path(out or Path(__file__).resolve().parents[1] / "tests" / "data" / "digit7.pgm")
    write_pgm(out, digit_bitmap() * 255.0)
    print(out)


if __name__ == "__main__":
    main(*sys.argv[1:])
