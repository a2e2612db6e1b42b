"""Image decoding and the binary/text artifact formats.

Label maps and scale masks use small little-endian binary formats with ASCII
magics; run reports and token retentions are line-oriented UTF-8 text.  All
writers are deterministic: identical inputs produce byte-identical files.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import FormatError, ImageReadError
from .tokenizer import TokenGrid, TokenRetention
from .types import LabelMap, RasterImage, ScaleMask

LABELMAP_MAGIC = b"GBSP"
LABELMAP_VERSION = 1
MASK_MAGIC = b"GBMK"

SUPPORTED_FORMATS = {"PNG", "PPM"}  # Pillow reports P5/P6 as PPM


def load_image(path: str | Path) -> RasterImage:
    """Decode a PNG/PPM/PGM file to an 8-bit gray or RGB raster."""
    try:
        with Image.open(path) as img:
            if img.format not in SUPPORTED_FORMATS:
                raise ImageReadError(
                    f"{path}: unsupported format {img.format}, expected PNG or PPM/PGM"
                )
            if img.mode == "1":
                img = img.convert("L")
            elif img.mode not in ("L", "RGB"):
                img = img.convert("RGB")
            arr = np.asarray(img, dtype=np.uint8)
    except ImageReadError:
        raise
    except FileNotFoundError:
        raise ImageReadError(f"{path}: no such file") from None
    except UnidentifiedImageError:
        raise ImageReadError(f"{path}: not a decodable image") from None
    except OSError as exc:
        raise ImageReadError(f"{path}: {exc}") from None
    return RasterImage.from_array(arr)


def save_png(image: RasterImage, path: str | Path) -> None:
    arr = image.data[:, :, 0] if image.channels == 1 else image.data
    Image.fromarray(arr).save(path, format="PNG")


def write_label_map(label_map: LabelMap, path: str | Path) -> None:
    header = LABELMAP_MAGIC + struct.pack(
        "<BIII",
        LABELMAP_VERSION,
        label_map.height,
        label_map.width,
        label_map.region_count,
    )
    body = label_map.labels.astype("<u4").tobytes()
    Path(path).write_bytes(header + body)


def read_label_map(path: str | Path) -> LabelMap:
    raw = Path(path).read_bytes()
    if len(raw) < 17 or raw[:4] != LABELMAP_MAGIC:
        raise FormatError(f"{path}: not a label-map file")
    version, height, width, region_count = struct.unpack("<BIII", raw[4:17])
    if version != LABELMAP_VERSION:
        raise FormatError(f"{path}: unsupported label-map version {version}")
    expected = 17 + height * width * 4
    if len(raw) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(raw)}")
    labels = np.frombuffer(raw, dtype="<u4", offset=17).reshape(height, width)
    if region_count and labels.max() >= region_count:
        raise FormatError(f"{path}: label exceeds region count {region_count}")
    return LabelMap(labels.astype(np.int32), region_count)


def write_mask(mask: ScaleMask, path: str | Path) -> None:
    header = MASK_MAGIC + struct.pack("<I", mask.grid_size)
    packed = np.packbits(mask.bits, axis=1)  # MSB-first, each row byte-padded
    Path(path).write_bytes(header + packed.tobytes())


def read_mask(path: str | Path) -> ScaleMask:
    raw = Path(path).read_bytes()
    if len(raw) < 8 or raw[:4] != MASK_MAGIC:
        raise FormatError(f"{path}: not a scale-mask file")
    (grid,) = struct.unpack("<I", raw[4:8])
    row_bytes = (grid + 7) // 8
    if len(raw) != 8 + grid * row_bytes:
        raise FormatError(f"{path}: truncated mask body for grid {grid}")
    packed = np.frombuffer(raw, dtype=np.uint8, offset=8).reshape(grid, row_bytes)
    bits = np.unpackbits(packed, axis=1)[:, :grid].astype(bool)
    return ScaleMask(grid, bits)


def write_report(fields: dict, path: str | Path) -> None:
    """key=value lines, one per field, in insertion order."""
    lines = [f"{key}={value}" for key, value in fields.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_report(path: str | Path) -> dict[str, str]:
    fields: dict[str, str] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        if "=" not in line:
            raise FormatError(f"{path}: malformed report line {line!r}")
        key, value = line.split("=", 1)
        fields[key] = value
    return fields


def write_retention(retention: TokenRetention, path: str | Path) -> None:
    lines = [f"tokens={retention.grid.total} removed={retention.removed_count}"]
    lines.extend(str(i) for i in retention.retained)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_retention(path: str | Path, grid: TokenGrid) -> TokenRetention:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("tokens="):
        raise FormatError(f"{path}: missing retention header")
    try:
        total_part, removed_part = lines[0].split()
        total = int(total_part.split("=", 1)[1])
        removed = int(removed_part.split("=", 1)[1])
        retained = tuple(int(line) for line in lines[1:] if line.strip())
    except (ValueError, IndexError):
        raise FormatError(f"{path}: malformed retention file") from None
    if total != grid.total or len(retained) + removed != total:
        raise FormatError(f"{path}: retention counts are inconsistent")
    return TokenRetention(grid, retained, removed, ())
