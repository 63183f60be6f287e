"""Pixel-image readout of walker distributions through circular node masks.

A camera frame is treated as a plain matrix of non-negative pixel
intensities.  Each graph node is assigned a circular region (centre pixel
coordinates plus radius); summing the intensity inside every circle and
normalising the sums turns a frame into a probability distribution over
nodes, and the exit node's share is the measured hitting efficiency.  No
background subtraction is applied: frames are assumed dark-corrected.

Pixel (row r, column c) has its centre at point (x=c, y=r), and a pixel
belongs to a circle when its centre satisfies (x-cx)^2 + (y-cy)^2 <= r^2.

The module also renders synthetic frames by dropping a truncated Gaussian
spot on every node centre with brightness proportional to the node's
probability.  Extraction of such a frame must reproduce the input
distribution, which gives the readout path an end-to-end oracle.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from hexwalk.graphs import Graph


class ImageParseError(ValueError):
    """Malformed pixel-matrix text; carries the 1-based offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class MaskError(ValueError):
    """Mask entries are inconsistent with each other, the image, or the graph."""


class DegenerateImageError(ValueError):
    """The masked regions hold no intensity, so no distribution exists."""


class SpotWidthWarning(UserWarning):
    """Rendered spots are wide enough to leak outside their own mask circle."""


class PixelImage:
    """Immutable matrix of non-negative pixel intensities."""

    def __init__(self, intensities: np.ndarray):
        arr = np.array(intensities, dtype=float)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("pixel matrix must be two-dimensional and non-empty")
        if not np.all(np.isfinite(arr)):
            raise ValueError("pixel intensities must be finite")
        if np.any(arr < 0.0):
            raise ValueError("pixel intensities must be non-negative")
        arr.flags.writeable = False
        self._intensities = arr

    @property
    def intensities(self) -> np.ndarray:
        return self._intensities

    @property
    def rows(self) -> int:
        return self._intensities.shape[0]

    @property
    def cols(self) -> int:
        return self._intensities.shape[1]

    @property
    def total(self) -> float:
        return float(self._intensities.sum())

    def __repr__(self) -> str:
        return f"PixelImage({self.rows}x{self.cols}, total={self.total:g})"


def parse_image(text: str) -> PixelImage:
    """Parse whitespace-separated rows of pixel values.

    Every row must hold the same number of values and every value must be
    a non-negative number.  Violations raise :class:`ImageParseError`
    carrying the 1-based line number; trailing blank lines are ignored.
    """
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ImageParseError("image is empty", 1)
    rows: list[list[float]] = []
    width = -1
    for lineno, line in enumerate(lines, start=1):
        tokens = line.split()
        if not tokens:
            raise ImageParseError("blank row inside the pixel matrix", lineno)
        if width < 0:
            width = len(tokens)
        elif len(tokens) != width:
            raise ImageParseError(
                f"row has {len(tokens)} values, expected {width}", lineno
            )
        try:
            values = [float(tok) for tok in tokens]
        except ValueError:
            bad = next(tok for tok in tokens if not _is_number(tok))
            raise ImageParseError(f"non-numeric value {bad!r}", lineno) from None
        if any(not np.isfinite(v) for v in values):
            raise ImageParseError("non-finite value", lineno)
        if any(v < 0.0 for v in values):
            raise ImageParseError("negative intensity", lineno)
        rows.append(values)
    return PixelImage(np.array(rows))


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def format_image(image: PixelImage) -> str:
    """Serialise a pixel matrix back to whitespace-separated text."""
    lines = [" ".join(format(v, ".10g") for v in row) for row in image.intensities]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class MaskEntry:
    """One node's readout circle: centre pixel coordinates and radius."""

    node_id: int
    cx: float
    cy: float
    radius: float


class MaskSpec:
    """Circular readout regions for a set of nodes, kept sorted by node id."""

    def __init__(self, entries):
        entries = tuple(sorted(entries, key=lambda e: e.node_id))
        if not entries:
            raise MaskError("mask needs at least one entry")
        ids = [e.node_id for e in entries]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise MaskError(f"duplicate node id {dup} in mask")
        for e in entries:
            if e.node_id < 0:
                raise MaskError(f"node id must be >= 0, got {e.node_id}")
            if not np.isfinite(e.radius) or e.radius <= 0.0:
                raise MaskError(f"node {e.node_id}: radius must be > 0, got {e.radius}")
            if not (np.isfinite(e.cx) and np.isfinite(e.cy)):
                raise MaskError(f"node {e.node_id}: centre must be finite")
        self._entries = entries

    @property
    def entries(self) -> tuple[MaskEntry, ...]:
        return self._entries

    @property
    def node_ids(self) -> tuple[int, ...]:
        return tuple(e.node_id for e in self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def validate_for(self, image: PixelImage) -> None:
        """Check circles sit fully inside the image and do not overlap."""
        for e in self._entries:
            if (
                e.cx - e.radius < 0.0
                or e.cy - e.radius < 0.0
                or e.cx + e.radius > image.cols - 1
                or e.cy + e.radius > image.rows - 1
            ):
                raise MaskError(
                    f"node {e.node_id}: circle at ({e.cx:g}, {e.cy:g}) r={e.radius:g} "
                    f"reaches outside a {image.rows}x{image.cols} image"
                )
        for i, a in enumerate(self._entries):
            for b in self._entries[i + 1 :]:
                gap2 = (a.cx - b.cx) ** 2 + (a.cy - b.cy) ** 2
                if gap2 < (a.radius + b.radius) ** 2:
                    raise MaskError(f"circles of nodes {a.node_id} and {b.node_id} overlap")

    def validate_against(self, graph: Graph) -> None:
        """Check the mask covers exactly the graph's node set."""
        expected = tuple(range(graph.n_nodes))
        if self.node_ids != expected:
            raise MaskError(
                f"mask covers nodes {self.node_ids}, expected 0..{graph.n_nodes - 1}"
            )


def parse_mask(text: str) -> MaskSpec:
    """Parse a mask CSV with header ``node_id,cx,cy,radius``."""
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise MaskError("mask file is empty")
    header = [col.strip() for col in lines[0].split(",")]
    if header != ["node_id", "cx", "cy", "radius"]:
        raise MaskError(f"mask header must be 'node_id,cx,cy,radius', got {lines[0]!r}")
    entries = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 4:
            raise MaskError(f"line {lineno}: expected 4 fields, got {len(fields)}")
        try:
            entries.append(
                MaskEntry(int(fields[0]), float(fields[1]), float(fields[2]), float(fields[3]))
            )
        except ValueError:
            raise MaskError(f"line {lineno}: malformed mask row {line!r}") from None
    return MaskSpec(entries)


def mask_csv(mask: MaskSpec) -> str:
    """Serialise a mask back to its CSV form."""
    lines = ["node_id,cx,cy,radius"]
    for e in mask.entries:
        lines.append(
            f"{e.node_id},{format(e.cx, '.10g')},{format(e.cy, '.10g')},{format(e.radius, '.10g')}"
        )
    return "\n".join(lines) + "\n"


def _circle_sum(image: PixelImage, entry: MaskEntry) -> float:
    r = entry.radius
    x0 = max(0, int(np.ceil(entry.cx - r)))
    x1 = min(image.cols - 1, int(np.floor(entry.cx + r)))
    y0 = max(0, int(np.ceil(entry.cy - r)))
    y1 = min(image.rows - 1, int(np.floor(entry.cy + r)))
    if x0 > x1 or y0 > y1:
        return 0.0
    xs = np.arange(x0, x1 + 1)
    ys = np.arange(y0, y1 + 1)
    inside = (xs[None, :] - entry.cx) ** 2 + (ys[:, None] - entry.cy) ** 2 <= r * r
    patch = image.intensities[y0 : y1 + 1, x0 : x1 + 1]
    return float(patch[inside].sum())


@dataclass
class ExtractionResult:
    """Per-node probabilities (sorted by node id) and the exit node's share."""

    node_ids: np.ndarray
    probabilities: np.ndarray
    efficiency: float


def extract_probabilities(
    image: PixelImage, mask: MaskSpec, exit_node: int | None = None
) -> ExtractionResult:
    """Turn a frame into a node distribution and read off the hitting efficiency.

    Sums the intensity inside every mask circle (pixel-centre membership),
    normalises the sums to unit total, and reports the exit node's share.
    The exit defaults to the largest node id in the mask, which is where
    every graph family here places its exit.

    Raises :class:`MaskError` for circles outside the image, overlapping
    circles, or an unknown exit node, and :class:`DegenerateImageError`
    when the masked regions hold no intensity at all.
    """
    mask.validate_for(image)
    ids = np.array(mask.node_ids, dtype=int)
    if exit_node is None:
        exit_node = int(ids[-1])
    elif exit_node not in set(mask.node_ids):
        raise MaskError(f"exit node {exit_node} has no mask entry")
    sums = np.array([_circle_sum(image, e) for e in mask.entries])
    total = float(sums.sum())
    if total <= 0.0:
        raise DegenerateImageError("masked regions hold zero total intensity")
    probs = sums / total
    efficiency = float(probs[ids == exit_node][0])
    return ExtractionResult(ids, probs, efficiency)


def render_synthetic(
    probabilities: np.ndarray,
    mask: MaskSpec,
    shape: tuple[int, int],
    sigma: float,
) -> PixelImage:
    """Render a frame of Gaussian spots, one per mask entry.

    ``probabilities`` aligns with the mask's node ids in sorted order.  Each
    spot is exp(-d^2 / (2 sigma^2)) scaled by the node's probability and
    truncated beyond 4 sigma.  The render is deterministic.  A sigma at or
    above the smallest mask radius leaks weight outside its own circle and
    triggers :class:`SpotWidthWarning`, since extraction can then no longer
    reproduce the input exactly.
    """
    probabilities = np.asarray(probabilities, dtype=float)
    if probabilities.shape != (len(mask),):
        raise ValueError(
            f"got {probabilities.shape[0] if probabilities.ndim == 1 else 'non-vector'} "
            f"probabilities for {len(mask)} mask entries"
        )
    if np.any(probabilities < 0.0) or not np.all(np.isfinite(probabilities)):
        raise ValueError("probabilities must be finite and non-negative")
    rows, cols = int(shape[0]), int(shape[1])
    if rows < 1 or cols < 1:
        raise ValueError(f"image shape must be positive, got {shape}")
    if not np.isfinite(sigma) or sigma <= 0.0:
        raise ValueError(f"spot width must be finite and > 0, got {sigma}")
    min_radius = min(e.radius for e in mask.entries)
    if sigma >= min_radius:
        warnings.warn(
            f"spot width {sigma:g} is at or above the smallest mask radius "
            f"{min_radius:g}; spots will leak between regions",
            SpotWidthWarning,
            stacklevel=2,
        )
    canvas = np.zeros((rows, cols))
    cut = 4.0 * sigma
    for p, e in zip(probabilities, mask.entries):
        if p == 0.0:
            continue
        x0 = max(0, int(np.ceil(e.cx - cut)))
        x1 = min(cols - 1, int(np.floor(e.cx + cut)))
        y0 = max(0, int(np.ceil(e.cy - cut)))
        y1 = min(rows - 1, int(np.floor(e.cy + cut)))
        if x0 > x1 or y0 > y1:
            continue
        xs = np.arange(x0, x1 + 1)
        ys = np.arange(y0, y1 + 1)
        d2 = (xs[None, :] - e.cx) ** 2 + (ys[:, None] - e.cy) ** 2
        spot = np.where(d2 <= cut * cut, np.exp(-d2 / (2.0 * sigma * sigma)), 0.0)
        canvas[y0 : y1 + 1, x0 : x1 + 1] += p * spot
    return PixelImage(canvas)
