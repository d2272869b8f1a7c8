"""From subbands to manifold points.

Each oriented subband is summarized by the maximum-likelihood fit of a
two-parameter distribution to its coefficient magnitudes; the ordered
list of fitted pairs is the image signature.
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from ..distributions import (ConvergenceError, DegenerateSample, GammaParams,
                             Sample, WeibullParams, gamma_mle, weibull_mle)
from ..geometry import Family
from .transform import ORIENTATIONS, SubbandSet, dtcwt_forward

# Magnitudes at double-precision noise level count as zeros: the
# highpass of a flat region is not exactly 0.0 in floating point, but
# it carries no texture information and would poison a positive-support
# fit.
_ZERO_FLOOR = 1e-12


class DegenerateSubband(ValueError):
    """Too many zero coefficients in a subband to fit a distribution."""


def subband_magnitudes(s: SubbandSet, level: int, orientation: int) -> Sample:
    """Coefficient magnitudes of one subband as a fit-ready sample.

    `level` is 1-based, `orientation` indexes ORIENTATIONS.  Zero
    magnitudes are dropped since the fitted families have positive
    support; if more than half the coefficients are zero the subband
    is reported as degenerate instead of fitting the remainder.
    """
    band = s.band(level, orientation)
    mags = np.abs(np.asarray(band)).ravel()
    keep = mags > _ZERO_FLOOR
    if 2 * int(keep.sum()) < mags.size:
        raise DegenerateSubband(
            "level %d, %d deg subband: %d of %d coefficients are zero"
            % (level, ORIENTATIONS[orientation],
               mags.size - int(keep.sum()), mags.size))
    return Sample(mags[keep])


@dataclass(frozen=True)
class Signature:
    """Per-subband fitted parameters of one image, level-major order."""

    family: Family
    levels: int
    params: Tuple[Union[GammaParams, WeibullParams], ...]

    def __post_init__(self):
        expected = 6 * self.levels
        if len(self.params) != expected:
            raise ValueError("signature needs %d parameter pairs, got %d"
                             % (expected, len(self.params)))
        want = GammaParams if self.family is Family.GAMMA else WeibullParams
        for i, p in enumerate(self.params):
            if not isinstance(p, want):
                raise ValueError("entry %d is %s, expected %s"
                                 % (i, type(p).__name__, want.__name__))


def extract_signature(img, family, levels: int) -> Signature:
    """Decompose an image and fit every subband.

    `family` may be a Family value or its string name.  Decomposition
    and fitting errors propagate with the offending (level,
    orientation) named in the message.
    """
    fam = Family(family) if not isinstance(family, Family) else family
    subbands = dtcwt_forward(img, levels)
    fit = gamma_mle if fam is Family.GAMMA else weibull_mle
    params = []
    for level in range(1, levels + 1):
        for k in range(len(ORIENTATIONS)):
            sample = subband_magnitudes(subbands, level, k)
            try:
                params.append(fit(sample))
            except (DegenerateSample, ConvergenceError) as exc:
                raise type(exc)(
                    "level %d, %d deg subband: %s"
                    % (level, ORIENTATIONS[k], exc)) from exc
    return Signature(family=fam, levels=levels, params=tuple(params))
