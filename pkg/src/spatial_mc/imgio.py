"""Reading images and RAWVOL volumes, writing masks and colour overlays.

2D grids use dims ``(width, height)``: array index ``[x, y]`` is the pixel in
column ``x`` and row ``y``.

RAWVOL v1 layout: LF-terminated ASCII header lines::

    RAWVOL v1
    dims <d0> <d1> <d2>
    spacing <s0> <s1> <s2>
    channels <name>...
    type f32le
    end

followed by, for each channel in order, ``prod(dims)`` little-endian float32
values with axis 0 varying fastest.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .grid import LoadError, ModelError, VoxelGrid

RAWVOL_MAGIC = "RAWVOL v1"


@dataclass
class OverlaySpec:
    base: str
    layers: list[tuple[np.ndarray, tuple[int, int, int]]] = field(default_factory=list)


def load(path) -> VoxelGrid:
    """Load a RAWVOL volume or a raster image, chosen by content."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            head = fh.read(len(RAWVOL_MAGIC))
    except OSError as exc:
        raise LoadError(f"cannot read {path}: {exc}") from exc
    if head == RAWVOL_MAGIC.encode():
        return load_volume(path)
    return load_image2d(path)


def load_image2d(path) -> VoxelGrid:
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("1", "L", "LA"):
                gray = np.asarray(im.convert("L"), dtype=np.float64)
                attrs = {"intensity": gray.T}
            elif mode in ("RGB", "RGBA", "P", "PA", "CMYK", "YCbCr"):
                rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
                r, g, b = (rgb[..., i].T for i in range(3))
                attrs = {"red": r, "green": g, "blue": b, "intensity": (r + g + b) / 3.0}
            elif mode in ("I", "I;16", "I;16B", "I;16L", "F"):
                arr = np.asarray(im, dtype=np.float64)
                attrs = {"intensity": arr.T}
            else:
                raise LoadError(f"unsupported image mode {mode} in {path}")
    except (OSError, UnidentifiedImageError) as exc:
        raise LoadError(f"cannot read image {path}: {exc}") from exc
    dims = attrs["intensity"].shape
    return VoxelGrid(dims, (1.0, 1.0), attrs)


def _header_fields(line: str, key: str) -> list[str]:
    parts = line.split()
    if not parts or parts[0] != key:
        raise LoadError(f"RAWVOL header: expected '{key}' line, found {line!r}")
    return parts[1:]


def load_volume(path) -> VoxelGrid:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise LoadError(f"cannot read {path}: {exc}") from exc
    lines = []
    pos = 0
    while len(lines) < 6:
        nl = data.find(b"\n", pos)
        if nl < 0:
            raise LoadError(f"{path}: truncated RAWVOL header")
        try:
            lines.append(data[pos:nl].decode("ascii"))
        except UnicodeDecodeError:
            raise LoadError(f"{path}: RAWVOL header is not ASCII") from None
        pos = nl + 1
    if lines[0] != RAWVOL_MAGIC:
        raise LoadError(f"{path}: not a RAWVOL v1 file")
    try:
        dims = tuple(int(v) for v in _header_fields(lines[1], "dims"))
        spacing = tuple(float(v) for v in _header_fields(lines[2], "spacing"))
    except ValueError as exc:
        raise LoadError(f"{path}: bad RAWVOL header: {exc}") from None
    channels = _header_fields(lines[3], "channels")
    if _header_fields(lines[4], "type") != ["f32le"]:
        raise LoadError(f"{path}: only 'type f32le' is supported")
    if lines[5] != "end":
        raise LoadError(f"{path}: expected 'end' after header")
    if not dims or any(d < 1 for d in dims) or len(spacing) != len(dims) or not channels:
        raise LoadError(f"{path}: inconsistent RAWVOL header")
    if len(set(channels)) != len(channels):
        raise LoadError(f"{path}: duplicate channel names")
    n = math.prod(dims)
    payload = data[pos:]
    expected = 4 * n * len(channels)
    if len(payload) != expected:
        raise LoadError(f"{path}: payload has {len(payload)} bytes, header implies {expected}")
    flat = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    attrs = {name: flat[i * n:(i + 1) * n].reshape(dims, order="F")
             for i, name in enumerate(channels)}
    try:
        return VoxelGrid(dims, spacing, attrs)
    except ModelError as exc:
        raise LoadError(f"{path}: {exc}") from None


def save_volume(path, grid: VoxelGrid, channels: Sequence[str] | None = None):
    channels = list(channels or grid.attributes)
    header = "\n".join([
        RAWVOL_MAGIC,
        "dims " + " ".join(str(d) for d in grid.dims),
        "spacing " + " ".join(repr(float(s)) for s in grid.spacing),
        "channels " + " ".join(channels),
        "type f32le",
        "end",
    ]) + "\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        for name in channels:
            fh.write(grid[name].ravel(order="F").astype("<f4").tobytes())


def _slices(shape):
    """(suffix, index) pairs splitting a 2D or 3D array into 2D images."""
    if len(shape) == 2:
        return [("", (slice(None), slice(None)))]
    if len(shape) == 3:
        return [(f"_z{k}", (slice(None), slice(None), k)) for k in range(shape[2])]
    raise ModelError(f"cannot render a {len(shape)}-dimensional grid as images")


def _with_suffix(path, suffix: str) -> Path:
    path = Path(path)
    if not suffix:
        return path
    return path.with_name(path.stem + suffix + path.suffix)


def _write_png(path: Path, arr: np.ndarray):
    # arr is uint8 indexed [x, y(, c)]; PIL wants [row, col(, c)]
    img = Image.fromarray(np.ascontiguousarray(np.swapaxes(arr, 0, 1)))
    img.save(path, format="PNG", optimize=False)


def save_mask(path, s: np.ndarray) -> list[Path]:
    """Write ``s`` as black/white image(s); 3D sets produce one file per z-slice."""
    s = np.asarray(s, dtype=bool)
    written = []
    for suffix, sl in _slices(s.shape):
        out = _with_suffix(path, suffix)
        _write_png(out, np.where(s[sl], 255, 0).astype(np.uint8))
        written.append(out)
    return written


def render_overlay(grid: VoxelGrid, spec: OverlaySpec) -> np.ndarray:
    """RGB array of shape ``grid.dims + (3,)``."""
    if spec.base not in grid.attributes:
        raise ModelError(f"unknown base attribute {spec.base}")
    base = grid[spec.base]
    lo, hi = float(base.min()), float(base.max())
    if hi > lo:
        gray = np.rint((base - lo) / (hi - lo) * 255.0).astype(np.uint8)
    else:
        gray = np.full(base.shape, 128, dtype=np.uint8)
    rgb = np.repeat(gray[..., None], 3, axis=-1)
    for mask, color in spec.layers:
        mask = grid.check_mask(mask)
        rgb[mask] = np.asarray(color, dtype=np.uint8)
    return rgb


def save_overlay(path, grid: VoxelGrid, spec: OverlaySpec) -> list[Path]:
    rgb = render_overlay(grid, spec)
    written = []
    for suffix, sl in _slices(grid.dims):
        out = _with_suffix(path, suffix)
        _write_png(out, rgb[sl])
        written.append(out)
    return written


def parse_color(text: str) -> tuple[int, int, int]:
    text = text.strip()
    if len(text) != 7 or text[0] != "#":
        raise ValueError(f"colour must look like #RRGGBB, got {text!r}")
    try:
        return tuple(int(text[i:i + 2], 16) for i in (1, 3, 5))
    except ValueError:
        raise ValueError(f"colour must look like #RRGGBB, got {text!r}") from None


def ensure_parent(path):
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
