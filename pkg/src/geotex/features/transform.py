"""2-D dual-tree complex wavelet decomposition.

The first level filters at full rate with the odd-length biorthogonal
pair and quad-samples the results; later levels run the even-length
quarter-shift pair on the interleaved two-tree arrays with decimation.
Each level yields 6 oriented complex subbands whose magnitudes are
nearly invariant to small input shifts, which is the property the
texture model relies on.
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from . import filters


class ImageTooSmall(ValueError):
    """Input image is below the minimum size for decomposition."""


# Subband orientation in degrees, in storage order.
ORIENTATIONS = (15, 45, 75, 105, 135, 165)

MIN_SIZE = 32
MAX_LEVELS = 5


def _reflect(x: np.ndarray, minx: float, maxx: float) -> np.ndarray:
    """Fold index values into [minx, maxx] by repeated reflection.

    With integer x and half-integer bounds this is symmetric extension
    with repeated edge samples.
    """
    rng = maxx - minx
    rng2 = 2.0 * rng
    mod = np.fmod(x - minx, rng2)
    mod = np.where(mod < 0.0, mod + rng2, mod)
    out = np.where(mod >= rng, rng2 - mod, mod) + minx
    return np.asarray(out, dtype=x.dtype)


def _conv_cols_valid(X: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Convolve the columns of X with h, fully-overlapped part only."""
    n = X.shape[0]
    m = h.shape[0]
    out = np.zeros((n + m - 1,) + X.shape[1:])
    for i in range(m):
        out[i:i + n] += h[i] * X
    return out[m - 1:n]


def colfilter(X: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Filter columns with an odd-length filter; row count preserved."""
    m2 = h.shape[0] // 2
    idx = _reflect(np.arange(-m2, X.shape[0] + m2), -0.5, X.shape[0] - 0.5)
    return _conv_cols_valid(X[idx], h)


def _tree_extend(x: np.ndarray, ext: np.ndarray, pre: int,
                 post: int) -> np.ndarray:
    """Extend x along axis 0: `pre` samples from the end of `ext` in
    front, `post` samples from its start behind.  If `ext` is too
    short, (x, ext) pairs are tiled, which keeps the reflection
    pattern going for very small arrays."""
    if pre > ext.shape[0]:
        pair = np.concatenate((x, ext))
        reps = -(-pre // pair.shape[0])
        head = np.concatenate([pair] * reps)[-pre:]
    else:
        head = ext[ext.shape[0] - pre:]
    if post > ext.shape[0]:
        pair = np.concatenate((ext, x))
        reps = -(-post // pair.shape[0])
        tail = np.concatenate([pair] * reps)[:post]
    else:
        tail = ext[:post]
    return np.concatenate((head, x, tail))


def coldfilt(X: np.ndarray, ha: np.ndarray, hb: np.ndarray) -> np.ndarray:
    """Dual-tree decimating column filter; halves the row count.

    The two trees are interleaved row-wise in X: `hb` filters the
    even-indexed rows (tree a), `ha` the odd-indexed rows (tree b).
    Each tree is extended with the reversed samples of the opposite
    tree, which is the boundary rule the quarter-shift delay pattern
    requires, then filtered and decimated by 2.  The two half-rate
    outputs are re-interleaved in time order of their effective
    sampling instants: the sign of <ha, hb> distinguishes the lowpass
    case (tree a leads) from the highpass case (tree b leads).
    """
    rows = X.shape[0]
    if rows % 4 != 0:
        raise ValueError("row count must be a multiple of 4, got %d" % rows)
    m = ha.shape[0]
    pre, post = (m - 1) // 2, m // 2
    a, b = X[0::2], X[1::2]
    fa = _conv_cols_valid(_tree_extend(a, b[::-1], pre, post), hb)[::2]
    fb = _conv_cols_valid(_tree_extend(b, a[::-1], pre, post), ha)[::2]
    Y = np.empty((rows // 2,) + X.shape[1:])
    if np.sum(ha * hb) > 0.0:
        Y[0::2], Y[1::2] = fa, fb
    else:
        Y[0::2], Y[1::2] = fb, fa
    return Y


def _q2c(y):
    """Combine 2x2 quads of a real subband pair into two complex
    subbands of opposite orientation.

    Quad corners a b / c d give p = (a + jb)/sqrt(2) and
    q = (d - jc)/sqrt(2); the subband pair is (p - q, p + q).  The
    1/sqrt(2) keeps the complex energy equal to the quad energy.
    """
    s = np.sqrt(0.5)
    p = (y[0::2, 0::2] + 1j * y[0::2, 1::2]) * s
    q = (y[1::2, 1::2] - 1j * y[1::2, 0::2]) * s
    return p - q, p + q


@dataclass
class SubbandSet:
    """Oriented complex subbands of one image, level-major."""

    levels: int
    subbands: List[List[np.ndarray]]
    lowpass: np.ndarray

    def __post_init__(self):
        if len(self.subbands) != self.levels:
            raise ValueError("subband list does not match level count")
        for per_level in self.subbands:
            if len(per_level) != len(ORIENTATIONS):
                raise ValueError("expected %d subbands per level"
                                 % len(ORIENTATIONS))

    def band(self, level: int, orientation: int) -> np.ndarray:
        """One subband; `level` is 1-based, `orientation` indexes
        ORIENTATIONS."""
        if not 1 <= level <= self.levels:
            raise IndexError("level %d out of range 1..%d"
                             % (level, self.levels))
        if not 0 <= orientation < len(ORIENTATIONS):
            raise IndexError("orientation index %d out of range"
                             % orientation)
        return self.subbands[level - 1][orientation]


def dtcwt_forward(img, levels: int) -> SubbandSet:
    """Forward 2-D dual-tree transform of a grayscale image.

    Accepts a GrayImage or a plain 2-D array.  Odd input dimensions
    are padded by one replicated edge row/column, and the interleaved
    lowpass is padded to a multiple of 4 before each decimating level.
    """
    X = np.asarray(getattr(img, "pixels", img), dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("expected a 2-D array of pixels")
    if not 1 <= levels <= MAX_LEVELS:
        raise ValueError("levels must be in 1..%d, got %d"
                         % (MAX_LEVELS, levels))
    if min(X.shape) < MIN_SIZE:
        raise ImageTooSmall("image is %dx%d; decomposition needs at least "
                            "%dx%d" % (X.shape[1], X.shape[0],
                                       MIN_SIZE, MIN_SIZE))
    if X.shape[0] % 2:
        X = np.vstack((X, X[-1:]))
    if X.shape[1] % 2:
        X = np.hstack((X, X[:, -1:]))

    out = []
    lo = colfilter(X, filters.H0O).T
    hi = colfilter(X, filters.H1O).T
    lolo = colfilter(lo, filters.H0O).T
    b15, b165 = _q2c(colfilter(hi, filters.H0O).T)
    b75, b105 = _q2c(colfilter(lo, filters.H1O).T)
    b45, b135 = _q2c(colfilter(hi, filters.H1O).T)
    out.append([b15, b45, b75, b105, b135, b165])

    for _ in range(1, levels):
        if lolo.shape[0] % 4:
            lolo = np.vstack((lolo[:1], lolo, lolo[-1:]))
        if lolo.shape[1] % 4:
            lolo = np.hstack((lolo[:, :1], lolo, lolo[:, -1:]))
        lo = coldfilt(lolo, filters.H00B, filters.H00A).T
        hi = coldfilt(lolo, filters.H01B, filters.H01A).T
        lolo = coldfilt(lo, filters.H00B, filters.H00A).T
        b15, b165 = _q2c(coldfilt(hi, filters.H00B, filters.H00A).T)
        b75, b105 = _q2c(coldfilt(lo, filters.H01B, filters.H01A).T)
        b45, b135 = _q2c(coldfilt(hi, filters.H01B, filters.H01A).T)
        out.append([b15, b45, b75, b105, b135, b165])

    return SubbandSet(levels=levels, subbands=out, lowpass=lolo)
