"""Image-to-signature pipeline.

Decodes grayscale images, decomposes them with the 2-D dual-tree
complex wavelet transform, and fits a two-parameter distribution to
the coefficient magnitudes of every oriented subband.  The ordered
list of fitted (scale, shape) pairs is the image signature consumed by
the graph and retrieval layers.
"""

from .filters import TABLE_SHA256, TABLE_VERSION, table_checksum
from .image import DecodeError, GrayImage, UnsupportedFormat, load_image
from .transform import (MAX_LEVELS, MIN_SIZE, ORIENTATIONS, ImageTooSmall,
                        SubbandSet, dtcwt_forward)
from .signature import (DegenerateSubband, Signature, extract_signature,
                        subband_magnitudes)

__all__ = [
    "TABLE_SHA256", "TABLE_VERSION", "table_checksum",
    "DecodeError", "GrayImage", "UnsupportedFormat", "load_image",
    "MAX_LEVELS", "MIN_SIZE", "ORIENTATIONS", "ImageTooSmall",
    "SubbandSet", "dtcwt_forward",
    "DegenerateSubband", "Signature", "extract_signature",
    "subband_magnitudes",
]
