"""Grayscale image loading.

PNG decoding goes through Pillow; PGM (P2 and P5) is parsed directly
so that any header maxval normalizes exactly to [0, 1].  Color inputs
are reduced with the usual luma weights 0.299 R + 0.587 G + 0.114 B.
"""

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError


class DecodeError(ValueError):
    """File could not be decoded as an image."""


class UnsupportedFormat(ValueError):
    """File is an image, but not one of the supported kinds."""


@dataclass
class GrayImage:
    """Row-major grayscale pixels in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        if self.pixels.ndim != 2 or self.pixels.size == 0:
            raise ValueError("pixels must be a nonempty 2-D array")
        if not np.all(np.isfinite(self.pixels)):
            raise ValueError("pixels must be finite")
        if self.pixels.min() < 0.0 or self.pixels.max() > 1.0:
            raise ValueError("pixels must lie in [0, 1]")

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])


def load_image(path) -> GrayImage:
    """Decode a PNG or PGM file to a GrayImage."""
    name = str(path).lower()
    if name.endswith(".pgm"):
        return GrayImage(_load_pgm(path))
    if name.endswith(".png"):
        return GrayImage(_load_png(path))
    raise UnsupportedFormat("unsupported extension on %s (expected .png or "
                            ".pgm)" % path)


def _load_png(path) -> np.ndarray:
    # read up front so a missing or unreadable file surfaces as a plain
    # OSError instead of a decode failure
    with open(path, "rb") as fh:
        blob = fh.read()
    try:
        with Image.open(io.BytesIO(blob)) as im:
            im.load()
            fmt = im.format
            if fmt != "PNG":
                raise UnsupportedFormat("%s decodes as %s, not PNG"
                                        % (path, fmt))
            mode = im.mode
            if mode in ("P", "RGBA", "LA"):
                im = im.convert("RGB" if mode != "LA" else "L")
                mode = im.mode
            if mode == "L":
                return np.asarray(im, dtype=np.float64) / 255.0
            if mode == "RGB":
                rgb = np.asarray(im, dtype=np.float64) / 255.0
                gray = (0.299 * rgb[..., 0] + 0.587 * rgb[..., 1]
                        + 0.114 * rgb[..., 2])
                return np.clip(gray, 0.0, 1.0)
            if mode in ("I", "I;16", "I;16B", "I;16L"):
                return np.asarray(im, dtype=np.float64) / 65535.0
            raise UnsupportedFormat("unsupported PNG mode %r in %s"
                                    % (mode, path))
    except UnidentifiedImageError as exc:
        raise DecodeError("cannot decode %s: %s" % (path, exc)) from exc
    except OSError as exc:
        # Pillow signals truncated/corrupt data as OSError.
        raise DecodeError("cannot decode %s: %s" % (path, exc)) from exc


def _pgm_tokens(blob: bytes, pos: int, count: int):
    """Read whitespace-separated integer tokens, honouring '#' comments."""
    vals = []
    n = len(blob)
    while len(vals) < count:
        while pos < n and blob[pos:pos + 1].isspace():
            pos += 1
        if pos < n and blob[pos:pos + 1] == b"#":
            while pos < n and blob[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < n and not blob[pos:pos + 1].isspace():
            pos += 1
        tok = blob[start:pos]
        if not tok.isdigit():
            raise DecodeError("bad PGM header token %r" % tok)
        vals.append(int(tok))
    return vals, pos


def _load_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    magic = blob[:2]
    if magic not in (b"P2", b"P5"):
        raise DecodeError("%s is not a PGM file (magic %r)" % (path, magic))
    try:
        (width, height, maxval), pos = _pgm_tokens(blob, 2, 3)
    except DecodeError as exc:
        raise DecodeError("%s: %s" % (path, exc)) from exc
    if width <= 0 or height <= 0 or not 0 < maxval < 65536:
        raise DecodeError("%s: bad PGM dimensions %dx%d maxval %d"
                          % (path, width, height, maxval))
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        wide = maxval > 255
        need = width * height * (2 if wide else 1)
        raster = blob[pos:pos + need]
        if len(raster) < need:
            raise DecodeError("%s: truncated raster (need %d bytes, have %d)"
                              % (path, need, len(raster)))
        values = np.frombuffer(raster, dtype=">u2" if wide else np.uint8)
    else:
        try:
            tokens, _ = _pgm_tokens(blob, pos, width * height)
        except DecodeError as exc:
            raise DecodeError("%s: %s" % (path, exc)) from exc
        values = np.array(tokens, dtype=np.int64)
    values = values.astype(np.float64)
    if values.max(initial=0.0) > maxval:
        raise DecodeError("%s: sample exceeds maxval %d" % (path, maxval))
    return values.reshape(height, width) / float(maxval)
