"""Image decoding, grayscale conversion, cropping and resizing"""

from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from PIL import Image, UnidentifiedImageError

from .errors import CorruptImageError, OutOfBoundsError, UnsupportedFormatError, ZeroDimensionError
from .types import GrayImage, Rect

# Pillow reports binary PGM under its PPM plugin
SUPPORTED_FORMATS = {"BMP", "PNG", "PPM"}

# ITU-R BT.601 luma weights
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def round_half_up(values: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.floor(values + 0.5)


def luma(rgb: NDArray[np.uint8]) -> NDArray[np.uint8]:
    """Convert an (H, W, 3) RGB array to 8-bit gray, rounding to nearest"""
    channels = rgb.astype(np.float64)
    gray = (
        LUMA_WEIGHTS[0] * channels[..., 0]
        + LUMA_WEIGHTS[1] * channels[..., 1]
        + LUMA_WEIGHTS[2] * channels[..., 2]
    )
    return np.clip(round_half_up(gray), 0, 255).astype(np.uint8)


def load_image(path: str | Path) -> GrayImage:
    """Decode a BMP, PNG or binary PGM file into a grayscale image"""
    image_path = Path(path)
    if not image_path.is_file():
        raise FileNotFoundError(f"Image not found: {image_path}")

    try:
        with Image.open(image_path) as im:
            if im.format not in SUPPORTED_FORMATS:
                raise UnsupportedFormatError(
                    f"{image_path}: unsupported format {im.format}"
                )
            im.load()
            if im.mode == "L":
                pixels = np.array(im, dtype=np.uint8)
            elif im.mode in ("1", "LA"):
                pixels = np.array(im.convert("L"), dtype=np.uint8)
            elif im.mode in ("RGB", "RGBA", "P", "PA"):
                pixels = luma(np.array(im.convert("RGB"), dtype=np.uint8))
            else:
                raise UnsupportedFormatError(f"{image_path}: unsupported pixel mode {im.mode}")
    except UnsupportedFormatError:
        raise
    except UnidentifiedImageError as e:
        raise UnsupportedFormatError(f"{image_path}: {e}") from e
    except (OSError, SyntaxError, ValueError) as e:
        raise CorruptImageError(f"{image_path}: {e}") from e

    return GrayImage(pixels)


def save_pgm(img: GrayImage, path: str | Path) -> None:
    """Dump an image as binary PGM (P5) for debugging"""
    Image.fromarray(np.array(img.pixels)).save(Path(path), format="PPM")


def crop(img: GrayImage, r: Rect) -> GrayImage:
    """Cut the rectangle r out of img"""
    if r.w < 1 or r.h < 1:
        raise OutOfBoundsError(f"crop rectangle must be at least 1x1, got {r.w}x{r.h}")
    if r.x < 0 or r.y < 0 or r.x + r.w > img.width or r.y + r.h > img.height:
        raise OutOfBoundsError(
            f"crop rectangle ({r.x},{r.y},{r.w},{r.h}) exceeds {img.width}x{img.height} image"
        )
    return GrayImage(np.array(img.pixels[r.y : r.y + r.h, r.x : r.x + r.w]))


def _sample_axis(src_len: int, dst_len: int) -> tuple[NDArray[np.intp], NDArray[np.intp], NDArray[np.float64]]:
    """Half-pixel centred source positions, clamped to the edge"""
    pos = (np.arange(dst_len, dtype=np.float64) + 0.5) * (src_len / dst_len) - 0.5
    pos = np.clip(pos, 0.0, src_len - 1.0)
    lo = np.floor(pos).astype(np.intp)
    hi = np.minimum(lo + 1, src_len - 1)
    return lo, hi, pos - lo


def resize(img: GrayImage, w: int, h: int) -> GrayImage:
    """Bilinear resize with edge clamping"""
    if w < 1 or h < 1:
        raise ZeroDimensionError(f"target size must be at least 1x1, got {w}x{h}")
    if w == img.width and h == img.height:
        return img

    src = img.as_float()
    x0, x1, fx = _sample_axis(img.width, w)
    y0, y1, fy = _sample_axis(img.height, h)

    top = src[y0][:, x0] * (1.0 - fx) + src[y0][:, x1] * fx
    bottom = src[y1][:, x0] * (1.0 - fx) + src[y1][:, x1] * fx
    out = top * (1.0 - fy)[:, None] + bottom * fy[:, None]
    return GrayImage(np.clip(round_half_up(out), 0, 255).astype(np.uint8))
