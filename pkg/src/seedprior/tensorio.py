"""Bit-exact file formats for grids, seeds, objectness maps and label masks.

Tensor container ("SEEDPRI1"):

    bytes 0..7    magic ``SEEDPRI1``
    bytes 8..11   header length, uint32 little-endian
    header        JSON: {"shape": [...], "channels": n,
                         "dtype": "f32"|"u8"|"u16", "order": "row-major"}
    payload       raw little-endian values, planar channel-first layout:
                  an array of shape (channels, *shape), row-major

Seed CSV: header ``x,y,class`` (2D) or ``x,y,z,class`` (3D), one row per
seed, 0-based integer coordinates, class >= 1. Column x indexes the
fastest axis (column), y the row, z the slice; a row (x, y, z) therefore
addresses grid coordinate (z, y, x). Instance ids are assigned by row
order.

Writers are atomic (temp file + rename); readers never return partial
data.
"""

from __future__ import annotations

import csv
import json
import os
import struct
import tempfile

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import FormatError, ValidationError
from .grid import Grid
from .objectness import ObjectnessMap, SeedSet

MAGIC = b"SEEDPRI1"

_DTYPES = {
    "f32": np.dtype("<f4"),
    "u8": np.dtype("<u1"),
    "u16": np.dtype("<u2"),
}


def _atomic_write(path, payload: bytes) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".seedprior-")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_tensor(path, array: np.ndarray, dtype: str = "f32") -> None:
    """Write an array of shape (channels, *spatial) as a tensor file."""
    if dtype not in _DTYPES:
        raise ValidationError(f"unknown tensor dtype {dtype!r}")
    array = np.asarray(array)
    if array.ndim < 3:
        raise ValidationError(
            "tensor arrays are (channels, *spatial) with spatial rank >= 2"
        )
    header = {
        "shape": [int(e) for e in array.shape[1:]],
        "channels": int(array.shape[0]),
        "dtype": dtype,
        "order": "row-major",
    }
    hbytes = json.dumps(header).encode("utf-8")
    payload = np.ascontiguousarray(array.astype(_DTYPES[dtype])).tobytes()
    _atomic_write(path, MAGIC + struct.pack("<I", len(hbytes)) + hbytes + payload)


def read_tensor(path) -> np.ndarray:
    """Read a tensor file back as a (channels, *spatial) array (file dtype)."""
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:8] != MAGIC:
        raise FormatError(f"{path}: not a tensor file (bad magic)")
    if len(blob) < 12:
        raise FormatError(f"{path}: truncated header")
    (hlen,) = struct.unpack("<I", blob[8:12])
    if len(blob) < 12 + hlen:
        raise FormatError(f"{path}: truncated header")
    try:
        header = json.loads(blob[12 : 12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"{path}: bad header JSON ({e})") from e
    try:
        shape = tuple(int(e) for e in header["shape"])
        channels = int(header["channels"])
        dtype = header["dtype"]
        order = header["order"]
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"{path}: malformed header ({e})") from e
    if order != "row-major":
        raise FormatError(f"{path}: unsupported order {order!r}")
    if dtype not in _DTYPES:
        raise FormatError(f"{path}: unsupported dtype {dtype!r}")
    dt = _DTYPES[dtype]
    expected = int(np.prod(shape)) * channels * dt.itemsize
    payload = blob[12 + hlen :]
    if len(payload) != expected:
        raise FormatError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    arr = np.frombuffer(payload, dtype=dt).reshape(channels, *shape)
    return arr.copy()


def _frame_to_planes(img, path) -> np.ndarray:
    mode = img.mode
    if mode == "L":
        return np.asarray(img, dtype=np.uint8)[None]
    if mode in ("I;16", "I;16L", "I;16B"):
        return np.asarray(img, dtype=np.uint16)[None]
    if mode == "I":
        a = np.asarray(img, dtype=np.int32)
        if a.min() < 0 or a.max() > 65535:
            raise FormatError(f"{path}: integer image exceeds 16-bit range")
        return a.astype(np.uint16)[None]
    if mode == "RGB":
        return np.moveaxis(np.asarray(img, dtype=np.uint8), -1, 0)
    raise FormatError(
        f"{path}: unsupported image mode {mode!r} "
        f"(expected 8/16-bit grayscale or 8-bit RGB)"
    )


def read_image(path) -> Grid:
    """Load a PNG, TIFF or tensor file as a Grid (raw values, float64).

    Multi-page TIFFs become volumes with pages as z slices; axis order is
    (z, y, x). No intensity normalization is applied here.
    """
    with open(path, "rb") as f:
        head = f.read(8)
    if head == MAGIC:
        return Grid(read_tensor(path).astype(np.float64))
    try:
        img = Image.open(path)
    except UnidentifiedImageError as e:
        raise FormatError(f"{path}: unrecognized image format") from e
    with img:
        n_frames = getattr(img, "n_frames", 1)
        planes = []
        for k in range(n_frames):
            img.seek(k)
            planes.append(_frame_to_planes(img, path))
        if n_frames == 1:
            data = planes[0]
        else:
            if len({p.shape for p in planes}) != 1:
                raise FormatError(f"{path}: pages differ in size or mode")
            data = np.stack(planes, axis=1)
    return Grid(data.astype(np.float64))


def _seed_rows(path, shape: tuple[int, ...]):
    rank = len(shape)
    expected = ["x", "y", "class"] if rank == 2 else ["x", "y", "z", "class"]
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = [c.strip().lower() for c in next(reader)]
        except StopIteration:
            raise ValidationError(f"{path}: empty seed file") from None
        if header != expected:
            raise ValidationError(
                f"{path}: header row must be {','.join(expected)} for a "
                f"{rank}D grid, got {','.join(header)}"
            )
        locations, classes = [], []
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(expected):
                raise ValidationError(
                    f"{path}: row {row_no} has {len(row)} columns, "
                    f"expected {len(expected)}"
                )
            try:
                nums = [int(c) for c in row]
            except ValueError:
                raise ValidationError(
                    f"{path}: row {row_no} has a non-integer value"
                ) from None
            *xyz, class_id = nums
            coord = tuple(reversed(xyz))  # (x, y[, z]) columns -> (z, y, x) axes
            if class_id < 1:
                raise ValidationError(
                    f"{path}: row {row_no} has class {class_id}; classes "
                    f"start at 1 (0 is reserved for background)"
                )
            if any(c < 0 or c >= e for c, e in zip(coord, shape)):
                raise ValidationError(
                    f"{path}: row {row_no} coordinate {tuple(xyz)} is out of "
                    f"bounds for shape {shape}"
                )
            if coord in locations:
                raise ValidationError(
                    f"{path}: row {row_no} duplicates an earlier seed location"
                )
            locations.append(coord)
            classes.append(class_id)
    return locations, classes


def read_seeds(path, g: Grid, num_classes: int | None = None) -> SeedSet:
    """Parse and validate a seed CSV against a grid; row order is seniority."""
    locations, classes = _seed_rows(path, g.shape)
    return SeedSet.from_points(locations, classes, num_classes)


def write_seeds(path, s: SeedSet, rank: int) -> None:
    """Write seeds in list order (instance ids are implicit in row order)."""
    if rank not in (2, 3):
        raise ValidationError("seed files support rank 2 or 3")
    header = "x,y,class" if rank == 2 else "x,y,z,class"
    lines = [header]
    for seed in s:
        if len(seed.location) != rank:
            raise ValidationError(
                f"seed at {seed.location} does not match rank {rank}"
            )
        xyz = ",".join(str(c) for c in reversed(seed.location))
        lines.append(f"{xyz},{seed.class_id}")
    _atomic_write(path, ("\n".join(lines) + "\n").encode("utf-8"))


def write_objectness(m: ObjectnessMap, path) -> None:
    """Write P as an f32 tensor plus the background mask as ``<path>.bg``."""
    write_tensor(path, m.P, "f32")
    write_tensor(str(path) + ".bg", m.background_mask[None].astype(np.uint8), "u8")


def read_objectness(path) -> ObjectnessMap:
    P = read_tensor(path).astype(np.float64)
    bg = read_tensor(str(path) + ".bg")
    return ObjectnessMap(P=P, background_mask=bg[0].astype(bool))


def write_labels(path, labels: np.ndarray) -> None:
    labels = np.asarray(labels)
    if labels.min() < 0 or labels.max() > 65535:
        raise ValidationError("label values must fit in u16")
    write_tensor(path, labels[None].astype(np.uint16), "u16")


def read_labels(path) -> np.ndarray:
    arr = read_tensor(path)
    if arr.shape[0] != 1:
        raise FormatError(f"{path}: label tensors are single-channel")
    return arr[0].astype(np.int64)
