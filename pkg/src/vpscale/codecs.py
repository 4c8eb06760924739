"""Lossless image codecs: PNG (via Pillow) and binary PPM/PGM.

Only lossless formats are accepted so that quality metrics compare exact
sample values; JPEG input is rejected outright.  PNG covers 8-bit gray, RGB
and RGBA plus 16-bit grayscale; 16-bit (or any non-power-of-two ``max_f``)
color data goes through PPM, whose ``maxval`` field is free-form up to 65535.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .resize import RasterImage

_PNM_WHITESPACE = b" \t\n\r\x0b\x0c"


class CodecError(OSError):
    """Unreadable, truncated or unsupported image file."""


def _next_token(data: bytes, pos: int, path: Path) -> tuple[bytes, int]:
    while pos < len(data):
        c = data[pos : pos + 1]
        if c in _PNM_WHITESPACE:
            pos += 1
        elif c == b"#":
            while pos < len(data) and data[pos : pos + 1] not in b"\r\n":
                pos += 1
        else:
            break
    if pos >= len(data):
        raise CodecError(f"{path}: truncated PNM header")
    start = pos
    while pos < len(data) and data[pos : pos + 1] not in _PNM_WHITESPACE:
        pos += 1
    return data[start:pos], pos


def _load_pnm(path: Path) -> RasterImage:
    data = path.read_bytes()
    magic = data[:2]
    if magic == b"P5":
        num_channels = 1
    elif magic == b"P6":
        num_channels = 3
    else:
        raise CodecError(f"{path}: not a binary PGM/PPM file (magic {magic!r})")
    pos = 2
    fields = []
    for _ in range(3):
        token, pos = _next_token(data, pos, path)
        try:
            fields.append(int(token))
        except ValueError as exc:
            raise CodecError(f"{path}: bad PNM header token {token!r}") from exc
    width, height, maxval = fields
    if width < 1 or height < 1 or not 1 <= maxval <= 65535:
        raise CodecError(f"{path}: bad PNM dimensions {width}x{height} maxval {maxval}")
    pos += 1  # single whitespace byte after maxval
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height * num_channels
    raster = data[pos : pos + count * dtype.itemsize]
    if len(raster) < count * dtype.itemsize:
        raise CodecError(f"{path}: truncated PNM raster")
    samples = np.frombuffer(raster, dtype=dtype).astype(np.float64)
    samples = samples.reshape(height, width, num_channels)
    planes = tuple(samples[:, :, c] for c in range(num_channels))
    return RasterImage(channels=planes, max_f=maxval)


def _save_pnm(image: RasterImage, path: Path) -> None:
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        if image.num_channels != 1:
            raise CodecError(f"{path}: PGM stores 1 channel, image has {image.num_channels}")
        magic = b"P5"
    else:
        if image.num_channels != 3:
            raise CodecError(f"{path}: PPM stores 3 channels, image has {image.num_channels}")
        magic = b"P6"
    dtype = np.dtype(">u2") if image.max_f > 255 else np.dtype("u1")
    stacked = np.stack(image.channels, axis=-1).astype(dtype)
    header = magic + f"\n{image.width} {image.height}\n{image.max_f}\n".encode("ascii")
    path.write_bytes(header + stacked.tobytes())


def _png_is_16bit_color(path: Path) -> bool:
    # IHDR layout: 8-byte signature, length+type, width, height, bit depth, color type
    with open(path, "rb") as fh:
        head = fh.read(26)
    return len(head) == 26 and head[24] == 16 and head[25] in (2, 6)


def _load_png(path: Path) -> RasterImage:
    if _png_is_16bit_color(path):
        raise CodecError(f"{path}: 16-bit color PNG is not supported, convert to PPM")
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode == "P":
                im = im.convert("RGBA" if "transparency" in im.info else "RGB")
            elif im.mode == "LA":
                im = im.convert("RGBA")
            elif im.mode == "1":
                im = im.convert("L")
            arr = np.asarray(im)
    except CodecError:
        raise
    except Exception as exc:
        raise CodecError(f"{path}: cannot decode PNG ({exc})") from exc
    if arr.dtype == np.uint8:
        max_f = 255
    elif arr.dtype in (np.uint16, np.int32):
        max_f = 65535
    else:
        raise CodecError(f"{path}: unsupported PNG sample type {arr.dtype}")
    arr = arr.astype(np.float64)
    if arr.ndim == 2:
        planes = (arr,)
    else:
        planes = tuple(arr[:, :, c] for c in range(arr.shape[2]))
    return RasterImage(channels=planes, max_f=max_f)


def _save_png(image: RasterImage, path: Path) -> None:
    stacked = np.stack(image.channels, axis=-1)
    if image.max_f == 255:
        data = stacked.astype(np.uint8)
        if image.num_channels == 1:
            pil = Image.fromarray(data[:, :, 0], mode="L")
        elif image.num_channels == 3:
            pil = Image.fromarray(data, mode="RGB")
        elif image.num_channels == 4:
            pil = Image.fromarray(data, mode="RGBA")
        else:
            raise CodecError(f"{path}: cannot store {image.num_channels} channels as PNG")
    elif image.max_f == 65535:
        if image.num_channels != 1:
            raise CodecError(f"{path}: 16-bit color PNG is not supported, use PPM")
        pil = Image.fromarray(stacked[:, :, 0].astype(np.uint16))
    else:
        raise CodecError(f"{path}: PNG needs max_f 255 or 65535, got {image.max_f}")
    pil.save(path, format="PNG")


def load_image(path) -> RasterImage:
    """Load a PNG or binary PPM/PGM file into float64 planes."""
    path = Path(path)
    if not path.is_file():
        raise CodecError(f"{path}: no such file")
    suffix = path.suffix.lower()
    if suffix in (".jpg", ".jpeg"):
        raise CodecError(f"{path}: JPEG is lossy and not supported, use PNG or PPM/PGM")
    if suffix == ".png":
        return _load_png(path)
    if suffix in (".ppm", ".pgm"):
        return _load_pnm(path)
    raise CodecError(f"{path}: unsupported format {suffix!r} (use .png, .ppm or .pgm)")


def save_image(image: RasterImage, path) -> None:
    """Write a quantized image losslessly; format selected by extension."""
    if not image.is_quantized():
        raise ValueError("image must be quantized (integers in [0, max_f]) before saving")
    path = Path(path)
    suffix = path.suffix.lower()
    try:
        if suffix == ".png":
            _save_png(image, path)
        elif suffix in (".ppm", ".pgm"):
            _save_pnm(image, path)
        elif suffix in (".jpg", ".jpeg"):
            raise CodecError(f"{path}: JPEG is lossy and not supported, use PNG or PPM/PGM")
        else:
            raise CodecError(f"{path}: unsupported format {suffix!r} (use .png, .ppm or .pgm)")
    except CodecError:
        raise
    except OSError as exc:
        raise CodecError(f"{path}: cannot write image ({exc})") from exc
