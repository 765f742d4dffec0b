"""File formats: raw video container, fingerprint patterns, macroblock CSV.

All multi-byte integers are little-endian. Formats:

* raw video  -- magic ``PRVW``, u32 width, u32 height, u32 fps_num,
  u32 fps_den, u32 frame_count, then ``frame_count`` planar frames of
  8-bit luma samples, row-major.
* fingerprint pattern -- magic ``PRNK``, u32 width, u32 height, then
  width*height float32 samples, row-major.
* macroblock metadata -- CSV with header ``frame,x,y,w,h,type,qp,bits``.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DimensionError,
    DuplicateCameraError,
    FormatError,
    TruncationError,
    UnknownCameraError,
)
from .mbmeta import MacroblockMeta

RAW_MAGIC = b"PRVW"
PATTERN_MAGIC = b"PRNK"

_HEADER = struct.Struct("<4sIIIII")
_PATTERN_HEADER = struct.Struct("<4sII")


@dataclass
class RawVideo:
    """Uncompressed single-channel video; frames share one (height, width)."""

    width: int
    height: int
    fps_num: int
    fps_den: int
    frames: np.ndarray  # (n, height, width) uint8

    def __post_init__(self) -> None:
        self.frames = np.asarray(self.frames, dtype=np.uint8)
        if self.width < 16 or self.height < 16:
            raise DimensionError(f"video dimensions {self.width}x{self.height} below 16x16")
        if self.width % 16 or self.height % 16:
            raise DimensionError(f"video dimensions {self.width}x{self.height} not multiples of 16")
        if self.frames.ndim != 3 or self.frames.shape[0] < 1:
            raise DimensionError("frames must be a non-empty (n, height, width) array")
        if self.frames.shape[1:] != (self.height, self.width):
            raise DimensionError(
                f"frame shape {self.frames.shape[1:]} does not match {self.height}x{self.width}"
            )
        if self.fps_num <= 0 or self.fps_den <= 0:
            raise DimensionError("frame rate must be positive")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def frame_rate(self) -> float:
        return self.fps_num / self.fps_den

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RawVideo):
            return NotImplemented
        return (
            (self.width, self.height, self.fps_num, self.fps_den)
            == (other.width, other.height, other.fps_num, other.fps_den)
            and self.frames.shape == other.frames.shape
            and bool(np.array_equal(self.frames, other.frames))
        )


def write_raw_video(video: RawVideo, path: str | Path) -> None:
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(
            _HEADER.pack(
                RAW_MAGIC, video.width, video.height, video.fps_num, video.fps_den, video.n_frames
            )
        )
        fh.write(video.frames.tobytes())


def read_raw_video(path: str | Path) -> RawVideo:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _HEADER.size:
        raise TruncationError(f"{path}: file shorter than raw video header")
    magic, width, height, fps_num, fps_den, n_frames = _HEADER.unpack_from(data)
    if magic != RAW_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {RAW_MAGIC!r}")
    if width < 16 or height < 16 or width % 16 or height % 16:
        raise DimensionError(f"{path}: dimensions {width}x{height} not valid multiples of 16")
    if n_frames < 1:
        raise FormatError(f"{path}: declared frame count {n_frames} < 1")
    expected = n_frames * width * height
    payload = data[_HEADER.size :]
    if len(payload) < expected:
        raise TruncationError(
            f"{path}: payload holds {len(payload)} bytes, header declares {expected}"
        )
    frames = np.frombuffer(payload[:expected], dtype=np.uint8).reshape(n_frames, height, width)
    return RawVideo(width, height, fps_num, fps_den, frames.copy())


def write_pattern(pattern: np.ndarray, path: str | Path) -> None:
    """Write a real-valued pattern plane as float32."""
    pattern = np.asarray(pattern)
    if pattern.ndim != 2:
        raise DimensionError("pattern must be a 2-D plane")
    height, width = pattern.shape
    with Path(path).open("wb") as fh:
        fh.write(_PATTERN_HEADER.pack(PATTERN_MAGIC, width, height))
        fh.write(pattern.astype("<f4").tobytes())


def read_pattern(path: str | Path) -> np.ndarray:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _PATTERN_HEADER.size:
        raise TruncationError(f"{path}: file shorter than pattern header")
    magic, width, height = _PATTERN_HEADER.unpack_from(data)
    if magic != PATTERN_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {PATTERN_MAGIC!r}")
    expected = width * height * 4
    payload = data[_PATTERN_HEADER.size :]
    if len(payload) < expected:
        raise TruncationError(f"{path}: pattern payload truncated")
    values = np.frombuffer(payload[:expected], dtype="<f4").reshape(height, width)
    return values.astype(np.float32)


@dataclass(frozen=True)
class CreationParams:
    """How a stored fingerprint was estimated."""

    method: str
    n_frames: int


@dataclass
class FingerprintRecord:
    camera_id: str
    pattern: np.ndarray
    source_descriptor: str = ""
    creation_params: CreationParams = field(default_factory=lambda: CreationParams("unknown", 0))


class FingerprintStore:
    """Directory of named fingerprints; one pattern + one JSON sidecar each.

    Writes are single-writer by contract; concurrent reads are safe.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _pattern_path(self, camera_id: str) -> Path:
        return self.root / f"{camera_id}.prnk"

    def _meta_path(self, camera_id: str) -> Path:
        return self.root / f"{camera_id}.json"

    def camera_ids(self) -> list[str]:
        if not self.root.is_dir():
            return []
        return sorted(p.stem for p in self.root.glob("*.prnk"))

    def store(self, record: FingerprintRecord) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        if self._pattern_path(record.camera_id).exists():
            raise DuplicateCameraError(f"camera id {record.camera_id!r} already stored")
        pattern = np.asarray(record.pattern)
        if pattern.ndim != 2 or pattern.shape[0] <= 0 or pattern.shape[1] <= 0:
            raise DimensionError("fingerprint pattern must be a non-empty 2-D plane")
        write_pattern(pattern, self._pattern_path(record.camera_id))
        meta = {
            "camera_id": record.camera_id,
            "source_descriptor": record.source_descriptor,
            "method": record.creation_params.method,
            "n_frames": record.creation_params.n_frames,
            "width": int(pattern.shape[1]),
            "height": int(pattern.shape[0]),
        }
        self._meta_path(record.camera_id).write_text(json.dumps(meta, indent=2))

    def load(self, camera_id: str) -> FingerprintRecord:
        pattern_path = self._pattern_path(camera_id)
        if not pattern_path.exists():
            raise UnknownCameraError(f"camera id {camera_id!r} not in store {self.root}")
        pattern = read_pattern(pattern_path)
        meta_path = self._meta_path(camera_id)
        descriptor = ""
        params = CreationParams("unknown", 0)
        if meta_path.exists():
            meta = json.loads(meta_path.read_text())
            descriptor = meta.get("source_descriptor", "")
            params = CreationParams(meta.get("method", "unknown"), int(meta.get("n_frames", 0)))
            declared = (meta.get("height"), meta.get("width"))
            if declared != pattern.shape:
                raise FormatError(
                    f"{camera_id!r}: sidecar declares {declared}, pattern file is {pattern.shape}"
                )
        return FingerprintRecord(camera_id, pattern, descriptor, params)


# Convenience wrappers matching the operation-style API.


def store_fingerprint(store: str | Path, record: FingerprintRecord) -> None:
    FingerprintStore(store).store(record)


def load_fingerprint(store: str | Path, camera_id: str) -> FingerprintRecord:
    return FingerprintStore(store).load(camera_id)


CSV_COLUMNS = ("frame", "x", "y", "w", "h", "type", "qp", "bits")


def export_mb_metadata(meta: list[MacroblockMeta], path: str | Path) -> None:
    """Write one CSV row per macroblock, header included."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for m in meta:
            writer.writerow([m.frame_index, m.x, m.y, m.width, m.height, m.mb_type, m.qp, m.bits])
