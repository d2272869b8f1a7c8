"""Filter bank coefficients for the dual-tree wavelet transform.

Level 1 uses Kingsbury's near-symmetric biorthogonal design with a
13-tap analysis lowpass and a 19-tap analysis highpass.  The lowpass
is exactly rational (integer taps over 5120), so its DC gain is
exactly 1 and its Nyquist gain exactly 0 in floating point.  The
highpass is the alternate-sign modulation of the 19-tap symmetric
synthesis lowpass, stored below as a half table.

Levels two and up use a 14-tap quarter-sample-shift orthonormal
lowpass.  The taps follow Kingsbury's published qshift 14-tap design
to about 1e-7, then were projected (Gauss-Newton on the constraint
residuals) onto the exact constraint set: unit norm, orthogonality to
its own even shifts, DC gain sqrt(2), zero gain at Nyquist.  The
projection is what makes "no response to a constant input" hold to
machine precision instead of design precision.

The four tree variants derive from the single lowpass HL:

    tree-b lowpass   H00B = HL
    tree-a lowpass   H00A = HL reversed
    tree-a highpass  H01A = HL with even-index taps negated
    tree-b highpass  H01B = H01A reversed

All tables are immutable module data; a checksum over their byte
representation is verified at import so accidental edits fail loudly.
"""

import hashlib

import numpy as np

TABLE_VERSION = 1

# 13-tap analysis lowpass, integer form over a common denominator.
H0O = np.array([-9.0, 0.0, 114.0, -240.0, -247.0, 1520.0, 2844.0,
                1520.0, -247.0, -240.0, 114.0, 0.0, -9.0]) / 5120.0

# 19-tap symmetric synthesis lowpass, outermost tap first, center last.
_G0O_HALF = np.array([
    +7.0626351023009445e-05,
    +0.0000000000000000e+00,
    -1.3419009044104077e-03,
    -1.8833693605637414e-03,
    +7.1568063121702462e-03,
    +2.3856018167578208e-02,
    -5.5643121627485068e-02,
    -5.1688059210864133e-02,
    +2.9975758986870338e-01,
    +5.5943082080769513e-01,
])
G0O = np.concatenate((_G0O_HALF, _G0O_HALF[:-1][::-1]))

# Analysis highpass: modulate the synthesis lowpass by (-1)^(n-center).
H1O = G0O * np.where(np.arange(G0O.size) % 2 == 0, -1.0, 1.0)

# 14-tap quarter-shift lowpass (exact-constraint projection, see above).
_HL = np.array([
    +3.25313145393795822e-03,
    -3.88320038419054077e-03,
    +3.46602300082523296e-02,
    -3.88726883306686824e-02,
    -1.17204014657017214e-01,
    +2.75295483102690697e-01,
    +7.56145533723438845e-01,
    +5.68810532359081966e-01,
    +1.18659740043147218e-02,
    -1.06711692187581059e-01,
    +2.38253826882087009e-02,
    +1.70252233700352133e-02,
    -5.43945603458782616e-03,
    -4.55687674282008112e-03,
])

H00B = _HL.copy()
H00A = _HL[::-1].copy()
H01A = _HL * np.where(np.arange(_HL.size) % 2 == 0, -1.0, 1.0)
H01B = H01A[::-1].copy()

_ALL_TABLES = (H0O, G0O, H1O, H00A, H00B, H01A, H01B)

for _t in _ALL_TABLES:
    _t.setflags(write=False)


def table_checksum() -> str:
    """SHA-256 over the little-endian float64 bytes of every table."""
    h = hashlib.sha256()
    for arr in _ALL_TABLES:
        h.update(arr.astype("<f8").tobytes())
    return h.hexdigest()


TABLE_SHA256 = "d5c44992ed56cfe895bb45df00cf6e2202047e3abb34108ef04bc014934404aa"

if table_checksum() != TABLE_SHA256:
    raise RuntimeError(
        "wavelet filter table checksum mismatch: expected %s, got %s"
        % (TABLE_SHA256, table_checksum()))
