"""Image and mask I/O plus color conversion.

Canonical raster conventions used throughout the package:

* RGB images are ``(H, W, 3)`` uint8 arrays, row-major, indexed ``[y, x]``.
* Lab images are ``(H, W, 3)`` float64 arrays (CIELAB under sRGB/D65,
  L in [0, 100]).
* Binary masks are ``(H, W)`` bool arrays; on disk they are 8-bit
  single-channel PNG with 0 = background and 255 = foreground, no
  intermediate values.

Images are written as PNG only (lossless, so masks round-trip exactly);
JPEG is accepted on input.
"""

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import FormatError, IoError

# sRGB -> XYZ (linear light, D65 reference white), IEC 61966-2-1 constants.
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)
_D65_WHITE = np.array([0.95047, 1.0, 1.08883])


def load_image(path):
    """Load a PNG or JPEG file as an ``(H, W, 3)`` uint8 RGB array.

    An alpha channel, if present, is dropped.

    Raises
    ------
    IoError
        If the file is missing or unreadable.
    FormatError
        If the bytes cannot be decoded as an image.
    """
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (FileNotFoundError, PermissionError, IsADirectoryError, OSError) as exc:
        if isinstance(exc, UnidentifiedImageError):
            raise FormatError(f"cannot decode image: {path}") from exc
        raise IoError(f"cannot read image: {path}") from exc


def save_image(img, path):
    """Write an ``(H, W, 3)`` uint8 RGB array as PNG."""
    arr = np.asarray(img, dtype=np.uint8)
    try:
        Image.fromarray(arr, mode="RGB").save(path, format="PNG")
    except OSError as exc:
        raise IoError(f"cannot write image: {path}") from exc


def save_gray(values, path):
    """Write values in [0, 1] as an 8-bit grayscale PNG (debug maps)."""
    arr = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    Image.fromarray((arr * 255.0 + 0.5).astype(np.uint8), mode="L").save(
        path, format="PNG"
    )


def save_mask(mask, path):
    """Write an ``(H, W)`` bool mask as single-channel 8-bit PNG.

    True maps to 255, False to 0.

    Raises
    ------
    IoError
        If the parent directory is missing or the file is unwritable.
    """
    arr = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    try:
        Image.fromarray(arr, mode="L").save(path, format="PNG")
    except OSError as exc:
        raise IoError(f"cannot write mask: {path}") from exc


def load_mask(path):
    """Load a mask PNG back to bool via a >127 threshold."""
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("L")) > 127
    except (FileNotFoundError, PermissionError, OSError) as exc:
        if isinstance(exc, UnidentifiedImageError):
            raise FormatError(f"cannot decode mask: {path}") from exc
        raise IoError(f"cannot read mask: {path}") from exc


def rgb_to_lab(img):
    """Convert an ``(H, W, 3)`` uint8 RGB image to float64 CIELAB.

    Uses the sRGB transfer curve and the D65 white point; deterministic,
    pure, and dimension-preserving.
    """
    rgb = np.asarray(img, dtype=np.float64) / 255.0
    lin = np.where(rgb <= 0.04045, rgb / 12.92, ((rgb + 0.055) / 1.055) ** 2.4)
    xyz = lin @ _RGB_TO_XYZ.T
    return _xyz_to_lab(xyz)


def lab_to_rgb(lab):
    """Inverse of :func:`rgb_to_lab`, clipped to the uint8 gamut."""
    lab = np.asarray(lab, dtype=np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    d = 6.0 / 29.0
    f = np.stack([fx, fy, fz], axis=-1)
    xyz = np.where(f > d, f**3, 3.0 * d * d * (f - 4.0 / 29.0))
    xyz = xyz * _D65_WHITE
    lin = xyz @ _XYZ_TO_RGB.T
    lin = np.clip(lin, 0.0, None)
    srgb = np.where(
        lin <= 0.0031308, 12.92 * lin, 1.055 * lin ** (1.0 / 2.4) - 0.055
    )
    return np.clip(srgb * 255.0 + 0.5, 0, 255).astype(np.uint8)


def _xyz_to_lab(xyz):
    t = xyz / _D65_WHITE
    d = 6.0 / 29.0
    f = np.where(t > d**3, np.cbrt(t), t / (3.0 * d * d) + 4.0 / 29.0)
    lab = np.empty_like(xyz)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab
