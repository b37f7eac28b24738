"""
Image of memristor: a lookup table of cell resistances shared by both parties.

The table stands in for the physical device: 128 addresses by 8 current
levels of resistance readings in ohms. Tables are generated deterministically
from a 64-bit seed with SplitMix64 so every platform reproduces them bit for
bit, and they persist as a small comma-separated text file.

SplitMix64 draw for cell (a, c), linear index i = 8a + c:

    z = (seed64 + (i + 1) * 0x9E3779B97F4A7C15) mod 2**64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    z =  z ^ (z >> 31)
    cell = 100.0 + 900.0 * ((z >> 11) * 2**-53)
"""
import logging
import math
from typing import BinaryIO, Optional

import numpy as np

from .digest_schedule import CellSelector
from .errors import ImageFormatError, ImageIoError, ImageValueError

logger = logging.getLogger(__name__)

ADDRESSES = 128
CURRENT_LEVELS = 8
CELL_COUNT = ADDRESSES * CURRENT_LEVELS

R_MIN = 100.0
R_SPAN = 900.0

GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
MIX_2 = np.uint64(0x94D049BB133111EB)
MASK_64 = (1 << 64) - 1


def splitmix64(seed64: int, count: int) -> np.ndarray:
    """
    Vectorized SplitMix64: outputs 1..count of the stream started at seed64.

    Args:
        seed64: 64-bit unsigned seed
        count: Number of outputs

    Returns:
        uint64 array of length count
    """
    z = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z *= GOLDEN_GAMMA
        z += np.uint64(seed64 & MASK_64)
        z ^= z >> np.uint64(30)
        z *= MIX_1
        z ^= z >> np.uint64(27)
        z *= MIX_2
        z ^= z >> np.uint64(31)
    return z


class MemristorImage:
    """Immutable 128x8 table of positive resistance readings (ohms)."""

    def __init__(self, cells: np.ndarray, source: Optional[str] = None):
        """
        Wrap and validate a resistance table.

        Args:
            cells: Array of shape (128, 8)
            source: Where the table came from, for log messages and file metadata

        Raises:
            ImageFormatError: If the shape is not 128x8
            ImageValueError: If any cell is non-finite or not strictly positive
        """
        table = np.array(cells, dtype=np.float64)
        if table.shape != (ADDRESSES, CURRENT_LEVELS):
            raise ImageFormatError(f"image must be {ADDRESSES}x{CURRENT_LEVELS}, got {table.shape}")
        if not np.all(np.isfinite(table)) or not np.all(table > 0.0):
            raise ImageValueError("every cell must be finite and strictly positive")
        table.flags.writeable = False
        self._cells = table
        self._source = source

    @property
    def cells(self) -> np.ndarray:
        return self._cells

    @property
    def source(self) -> Optional[str]:
        return self._source

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MemristorImage):
            return NotImplemented
        # bitwise
        return self._cells.tobytes() == other._cells.tobytes()

    def __repr__(self) -> str:
        return f"MemristorImage(source={self.source!r}, range=[{self._cells.min():.3f}, {self._cells.max():.3f}])"

    def read_cell(self, sel: CellSelector) -> float:
        return float(self._cells[sel.address, sel.current])

    def read_cells(self, selectors) -> np.ndarray:
        """Vectorized read_cell for a sequence of selectors."""
        addresses = np.fromiter((s.address for s in selectors), dtype=np.intp)
        currents = np.fromiter((s.current for s in selectors), dtype=np.intp)
        return self._cells[addresses, currents]


def generate_image(seed64: int) -> MemristorImage:
    """Deterministic stand-in table for the memristor device."""
    draws = splitmix64(seed64, CELL_COUNT)
    fraction = (draws >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
    cells = R_MIN + R_SPAN * fraction
    logger.debug(f"Generated memristor image from seed {seed64 & MASK_64:#018x}")
    return MemristorImage(cells.reshape(ADDRESSES, CURRENT_LEVELS), source=f"seed:{seed64 & MASK_64}")


def read_cell(img: MemristorImage, sel: CellSelector) -> float:
    """Resistance at (sel.address, sel.current); the order field is not used."""
    return img.read_cell(sel)


def save_image(img: MemristorImage, sink: BinaryIO) -> int:
    """
    Write the image in the LUT text format.

    Each double is rendered with Python's shortest round-trip repr so
    loading gives back the identical bit pattern.

    Returns:
        Number of bytes written

    Raises:
        ImageIoError: If the sink cannot be written
    """
    lines = [
        "# keyless memristor image",
        f"# source: {img.source or 'unknown'}",
        f"# rows: {ADDRESSES} addresses, columns: {CURRENT_LEVELS} current levels, unit: ohm",
    ]
    for row in img.cells:
        lines.append(",".join(repr(float(v)) for v in row))
    payload = ("\n".join(lines) + "\n").encode("utf-8")
    try:
        sink.write(payload)
    except (OSError, ValueError) as e:
        raise ImageIoError(f"Failed to write memristor image: {e}") from e
    return len(payload)


def load_image(source: BinaryIO, name: Optional[str] = None) -> MemristorImage:
    """
    Parse a LUT file.

    Args:
        source: Binary stream with the LUT text
        name: Origin recorded on the image; defaults to the stream's name, if any

    Raises:
        ImageIoError: If the source cannot be read or is not UTF-8
        ImageFormatError: On a wrong row/column count or an unparsable number
        ImageValueError: On a non-positive or non-finite value
    """
    try:
        text = source.read().decode("utf-8")
    except (OSError, UnicodeDecodeError, ValueError) as e:
        raise ImageIoError(f"Failed to read memristor image: {e}") from e

    rows = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split(",")
        if len(fields) != CURRENT_LEVELS:
            raise ImageFormatError(f"line {lineno}: expected {CURRENT_LEVELS} values, got {len(fields)}")
        try:
            values = [float(f) for f in fields]
        except ValueError as e:
            raise ImageFormatError(f"line {lineno}: {e}") from e
        for v in values:
            if not math.isfinite(v) or v <= 0.0:
                raise ImageValueError(f"line {lineno}: resistance must be finite and positive, got {v!r}")
        rows.append(values)

    if len(rows) != ADDRESSES:
        raise ImageFormatError(f"expected {ADDRESSES} rows, got {len(rows)}")
    return MemristorImage(np.array(rows, dtype=np.float64), source=name or getattr(source, "name", None))


def load_image_file(path) -> MemristorImage:
    """Open and parse a LUT file from disk."""
    try:
        with open(path, "rb") as f:
            img = load_image(f, name=str(path))
    except OSError as e:
        raise ImageIoError(f"Cannot open memristor image {path}: {e}") from e
    logger.info(f"Loaded memristor image from {path}")
    return img
