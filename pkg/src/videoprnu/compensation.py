"""QP-aware contribution control: masks, weight curves, and block splicing.

Macroblocks coded at high QP carry mostly quantization noise, so their
contribution to fingerprint estimation is either cut (binary mask at the
QP-28 threshold) or scaled by a per-QP weight. Weights come from the square
root of the per-QP detection-statistic curve normalized at QP 15, either
the shipped default anchored at (10, 1.74), (15, 1.0), (25, 0.25) or a
curve calibrated from decoded footage of a known sensor.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .detector import pce
from .errors import ConfigError, CoverageError, DimensionError
from .estimator import single_frame_pattern
from .mbmeta import MacroblockMeta, group_by_frame

MASK_THRESHOLD_QP = 28
BASE_QP = 15
_LOG_FLOOR = 1e-12


@dataclass
class WeightCurve:
    """Piecewise log-linear QP -> weight map, zero above the cutoff.

    Between anchors the weight interpolates linearly in log space; below the
    first anchor it is held flat; past the last anchor the final segment's
    geometric decay continues until the cutoff kills it.
    """

    anchors: list[tuple[float, float]]
    base_qp: int = BASE_QP
    cutoff_qp: float = MASK_THRESHOLD_QP

    def __post_init__(self) -> None:
        if not self.anchors:
            raise ConfigError("weight curve needs at least one anchor")
        self.anchors = sorted((float(q), float(w)) for q, w in self.anchors)
        qps = [q for q, _ in self.anchors]
        if len(set(qps)) != len(qps):
            raise ConfigError("duplicate anchor qp")
        if any(w < 0 for _, w in self.anchors):
            raise ConfigError("anchor weights must be >= 0")
        base = self(self.base_qp)
        if abs(base - 1.0) > 1e-6:
            raise ConfigError(f"weight at base qp {self.base_qp} must be 1, got {base}")
        tail = [w for q, w in self.anchors if q >= 10]
        if any(b > a + 1e-9 for a, b in zip(tail, tail[1:])):
            raise ConfigError("weights must be non-increasing for qp >= 10")

    def _segment(self, qp: float) -> float:
        qs = [q for q, _ in self.anchors]
        ws = [w for _, w in self.anchors]
        if qp <= qs[0]:
            return ws[0]
        if qp >= qs[-1]:
            if len(qs) == 1:
                return ws[-1]
            lo, hi = len(qs) - 2, len(qs) - 1
        else:
            hi = next(i for i, q in enumerate(qs) if q > qp)
            lo = hi - 1
        q0, q1 = qs[lo], qs[hi]
        w0, w1 = ws[lo], ws[hi]
        t = (qp - q0) / (q1 - q0)
        if w0 <= 0 or w1 <= 0:
            # log-linear undefined through zero; fall back to linear
            return max(w0 + t * (w1 - w0) if qp <= q1 else 0.0, 0.0)
        return float(np.exp(np.log(w0) + t * (np.log(w1) - np.log(w0))))

    def __call__(self, qp: float) -> float:
        if qp > self.cutoff_qp:
            return 0.0
        return self._segment(float(qp))

    def table(self, qp_min: int = 1, qp_max: int = 51) -> list[tuple[int, float]]:
        return [(qp, self(qp)) for qp in range(qp_min, qp_max + 1)]


def default_curve() -> WeightCurve:
    """The shipped QP weighting curve: anchored, normalized at QP 15."""
    return WeightCurve(anchors=[(10, 1.74), (15, 1.0), (25, 0.25)], cutoff_qp=MASK_THRESHOLD_QP)


def step_curve(threshold_qp: float = MASK_THRESHOLD_QP) -> WeightCurve:
    """0/1 curve equivalent to binary masking at the given threshold."""
    return WeightCurve(anchors=[(1, 1.0)], cutoff_qp=threshold_qp)


def write_curve_csv(curve: WeightCurve, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["qp", "weight"])
        for qp, weight in curve.table():
            writer.writerow([qp, format(weight, ".10g")])


def read_curve_csv(path: str | Path) -> WeightCurve:
    rows: list[tuple[float, float]] = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append((float(row["qp"]), float(row["weight"])))
    if not rows:
        raise ConfigError(f"{path}: empty weight curve")
    positive = [(q, w) for q, w in rows if w > 0]
    if not positive:
        raise ConfigError(f"{path}: weight curve is zero everywhere")
    cutoff = max(q for q, _ in positive)
    return WeightCurve(anchors=positive, cutoff_qp=cutoff)


def _frame_grid(
    meta: list[MacroblockMeta], width: int, height: int
) -> list[MacroblockMeta]:
    """Validate that metadata tiles a width x height frame exactly once."""
    counts = np.zeros((height, width), dtype=np.int32)
    for m in meta:
        if m.x < 0 or m.y < 0 or m.x + m.width > width or m.y + m.height > height:
            raise CoverageError(f"macroblock at ({m.x}, {m.y}) falls outside {width}x{height}")
        counts[m.y : m.y + m.height, m.x : m.x + m.width] += 1
    if not np.all(counts == 1):
        raise CoverageError("macroblock metadata does not tile the frame exactly once")
    return meta


def binary_mask(
    meta: list[MacroblockMeta],
    width: int,
    height: int,
    threshold_qp: int = MASK_THRESHOLD_QP,
) -> np.ndarray:
    """1 where the covering macroblock's QP is at most the threshold, else 0."""
    out = np.zeros((height, width))
    for m in _frame_grid(meta, width, height):
        out[m.y : m.y + m.height, m.x : m.x + m.width] = 1.0 if m.qp <= threshold_qp else 0.0
    return out


def weight_map(
    meta: list[MacroblockMeta], curve: WeightCurve, width: int, height: int
) -> np.ndarray:
    """Expand per-macroblock QPs into a per-pixel weight plane."""
    out = np.zeros((height, width))
    for m in _frame_grid(meta, width, height):
        out[m.y : m.y + m.height, m.x : m.x + m.width] = curve(m.qp)
    return out


def _isotonic_non_increasing(values: np.ndarray) -> np.ndarray:
    """Pool-adjacent-violators fit for a non-increasing sequence."""
    blocks = [[v, 1] for v in values]
    merged: list[list[float]] = []
    for block in blocks:
        merged.append(block)
        while len(merged) > 1 and merged[-2][0] < merged[-1][0]:
            v2, n2 = merged.pop()
            v1, n1 = merged.pop()
            merged.append([(v1 * n1 + v2 * n2) / (n1 + n2), n1 + n2])
    out: list[float] = []
    for v, n in merged:
        out.extend([v] * n)
    return np.array(out)


def calibrate_curve(
    reference: np.ndarray,
    outputs_by_qp: dict[int, "object"],
    cutoff_qp: float | None = None,
) -> WeightCurve:
    """Fit a weight curve from decoded constant-QP footage of a known sensor.

    For each QP the mean single-frame detection statistic against the
    reference is computed, normalized by the QP-15 value, and the weight is
    its square root; weights at QP >= 10 are made non-increasing by an
    isotonic pass. ``outputs_by_qp`` maps qp -> an object with ``frames``
    (a loop-filter-bypass decode output). With no explicit cutoff the curve
    is zero beyond the calibrated grid.
    """
    if BASE_QP not in outputs_by_qp:
        raise ConfigError(f"calibration grid must include qp {BASE_QP}")
    reference = np.asarray(reference, dtype=np.float64)

    mean_pce: dict[int, float] = {}
    for qp, output in sorted(outputs_by_qp.items()):
        values = []
        for frame in output.frames:
            pattern = single_frame_pattern(frame)
            if pattern.shape != reference.shape:
                raise DimensionError(
                    f"decoded frames {pattern.shape} do not match reference {reference.shape}"
                )
            values.append(pce(pattern, reference).pce)
        if not values:
            raise ConfigError(f"no frames decoded for qp {qp}")
        mean_pce[qp] = float(np.mean(values))

    base = mean_pce[BASE_QP]
    if base <= 0:
        raise ConfigError("qp-15 calibration video produced a zero detection statistic")

    qps = sorted(mean_pce)
    weights = np.sqrt(np.maximum([mean_pce[q] / base for q in qps], 0.0))
    tail = [i for i, q in enumerate(qps) if q >= 10]
    if tail:
        weights[tail] = _isotonic_non_increasing(weights[tail])
    # Re-pin the base anchor: the isotonic pass may have pooled it.
    weights = weights / weights[qps.index(BASE_QP)]

    anchors = list(zip(map(float, qps), map(float, weights)))
    return WeightCurve(anchors, cutoff_qp=max(qps) if cutoff_qp is None else cutoff_qp)


def default_ranking(m: MacroblockMeta) -> tuple:
    """Lower QP first, then smoother blocks, then original frame order."""
    return (m.qp, m.residual_energy, m.frame_index)


def splice_frames(
    residues: list[np.ndarray],
    meta: list[MacroblockMeta],
    ranking=None,
    threshold_qp: int | None = MASK_THRESHOLD_QP,
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Rebuild residue frames by picking, per grid position, the most
    reliable blocks across all frames.

    Blocks never move: spliced frame j holds, at every position, the j-th
    best block of that position under ``ranking`` (default: ascending QP,
    then coded residual energy as a texture score, then frame order).
    Blocks above ``threshold_qp`` are dropped entirely. Each spliced frame
    comes with a 0/1 map flagging positions that ran out of valid blocks.
    """
    if not residues:
        return [], []
    shape = residues[0].shape
    if any(r.shape != shape for r in residues):
        raise DimensionError("all residue frames must share one shape")
    height, width = shape

    if ranking is None:
        ranking = default_ranking

    by_frame = group_by_frame(meta)
    frame_ids = sorted(by_frame)
    if len(frame_ids) != len(residues):
        raise DimensionError(
            f"metadata covers {len(frame_ids)} frames but {len(residues)} residues given"
        )
    index_of = {fid: i for i, fid in enumerate(frame_ids)}
    for fid in frame_ids:
        _frame_grid(by_frame[fid], width, height)

    positions: dict[tuple[int, int], list[MacroblockMeta]] = {}
    for fid in frame_ids:
        for m in by_frame[fid]:
            positions.setdefault((m.y, m.x), []).append(m)

    ranked: dict[tuple[int, int], list[MacroblockMeta]] = {}
    depth = 0
    for pos, blocks in positions.items():
        valid = [m for m in blocks if threshold_qp is None or m.qp <= threshold_qp]
        valid.sort(key=ranking)
        ranked[pos] = valid
        depth = max(depth, len(valid))

    spliced: list[np.ndarray] = []
    maps: list[np.ndarray] = []
    for j in range(depth):
        frame = np.zeros(shape)
        wmap = np.zeros(shape)
        for (y, x), blocks in ranked.items():
            if j < len(blocks):
                m = blocks[j]
                src = residues[index_of[m.frame_index]]
                frame[y : y + m.height, x : x + m.width] = src[
                    y : y + m.height, x : x + m.width
                ]
                wmap[y : y + m.height, x : x + m.width] = 1.0
        spliced.append(frame)
        maps.append(wmap)
    return spliced, maps
