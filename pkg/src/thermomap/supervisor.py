"""Tier-3 building supervisor: frame assembly, storage, queries, playback.

Room readings arriving from concentrators are bucketed by cycle timestamp;
a bucket seals into an immutable building-wide ThermalFrame either when all
registered rooms have reported or when a grace window lapses. Sealed frames
are appended to a per-building log file of length-prefixed JSON records that
an in-memory index makes queryable by time range.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from thermomap.concentrator import RoomReading
from thermomap.geometry import BuildingModel, SensorPlacement, Vec3

log = logging.getLogger(__name__)

_LEN_BYTES = 4


class NoFramesError(LookupError):
    """Query needs at least one sealed frame and the store has none."""


class UnknownBuildingError(KeyError):
    """Building id absent from the store."""


@dataclass(frozen=True)
class ThermalFrame:
    """One building-wide snapshot: sensor_id -> (position, temp, rh)."""

    building_id: str
    t: float
    samples: dict[str, tuple[Vec3, float, float]]
    completeness: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.completeness <= 1.0:
            raise ValueError(f"completeness {self.completeness} outside [0, 1]")

    def to_dict(self) -> dict[str, Any]:
        return {
            "building_id": self.building_id,
            "t": self.t,
            "samples": {
                sid: {"position": list(pos), "temp": temp, "rh": rh}
                for sid, (pos, temp, rh) in self.samples.items()
            },
            "completeness": self.completeness,
        }


def frame_from_dict(data: dict[str, Any]) -> ThermalFrame:
    samples = {
        sid: ((s["position"][0], s["position"][1], s["position"][2]), s["temp"], s["rh"])
        for sid, s in data["samples"].items()
    }
    return ThermalFrame(
        building_id=data["building_id"],
        t=float(data["t"]),
        samples=samples,
        completeness=float(data["completeness"]),
    )


def _encode_record(frame: ThermalFrame) -> bytes:
    payload = json.dumps(frame.to_dict(), sort_keys=True, separators=(",", ":")).encode("utf-8")
    return len(payload).to_bytes(_LEN_BYTES, "big") + payload


class FrameStore:
    """Append-only per-building frame logs under one directory."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        # building -> list of (t, byte offset, payload length), ascending t
        self._index: dict[str, list[tuple[float, int, int]]] = {}
        for path in sorted(self.root.glob("*.frames")):
            self._load_index(path.stem, path)

    def _path(self, building_id: str) -> Path:
        return self.root / f"{building_id}.frames"

    def _load_index(self, building_id: str, path: Path) -> None:
        entries: list[tuple[float, int, int]] = []
        with path.open("rb") as fh:
            offset = 0
            while True:
                header = fh.read(_LEN_BYTES)
                if not header:
                    break
                if len(header) < _LEN_BYTES:
                    raise ValueError(f"truncated record header in {path}")
                length = int.from_bytes(header, "big")
                payload = fh.read(length)
                if len(payload) < length:
                    raise ValueError(f"truncated record payload in {path}")
                record = json.loads(payload.decode("utf-8"))
                entries.append((float(record["t"]), offset + _LEN_BYTES, length))
                offset += _LEN_BYTES + length
        self._index[building_id] = entries

    def buildings(self) -> list[str]:
        return sorted(self._index)

    def frame_count(self, building_id: str) -> int:
        return len(self._index.get(building_id, []))

    def append(self, frame: ThermalFrame) -> None:
        entries = self._index.setdefault(frame.building_id, [])
        if entries and frame.t <= entries[-1][0]:
            raise ValueError(
                f"frame timestamps must increase: {frame.t} after {entries[-1][0]}"
            )
        record = _encode_record(frame)
        path = self._path(frame.building_id)
        with path.open("ab") as fh:
            offset = fh.tell()
            fh.write(record)
        entries.append((frame.t, offset + _LEN_BYTES, len(record) - _LEN_BYTES))

    def _read_at(self, building_id: str, offset: int, length: int) -> ThermalFrame:
        with self._path(building_id).open("rb") as fh:
            fh.seek(offset)
            payload = fh.read(length)
        return frame_from_dict(json.loads(payload.decode("utf-8")))

    def _entries(self, building_id: str) -> list[tuple[float, int, int]]:
        if building_id not in self._index:
            raise UnknownBuildingError(building_id)
        return self._index[building_id]

    def timestamps(self, building_id: str) -> list[float]:
        return [t for t, _, _ in self._entries(building_id)]

    def query_range(self, building_id: str, t0: float, t1: float) -> list[ThermalFrame]:
        """All frames with t in [t0, t1], ascending."""
        if t0 > t1:
            raise ValueError(f"empty time range: t0 {t0} > t1 {t1}")
        entries = self._entries(building_id)
        return [
            self._read_at(building_id, off, length)
            for t, off, length in entries
            if t0 <= t <= t1
        ]

    def latest(self, building_id: str) -> ThermalFrame:
        entries = self._entries(building_id)
        if not entries:
            raise NoFramesError(f"no frames stored for building {building_id!r}")
        t, off, length = entries[-1]
        return self._read_at(building_id, off, length)

    def latest_at(self, building_id: str, t: float) -> ThermalFrame:
        """Most recent frame with timestamp <= t (the playback cursor rule)."""
        entries = self._entries(building_id)
        candidates = [e for e in entries if e[0] <= t]
        if not candidates:
            raise NoFramesError(f"no frame at or before t={t} for {building_id!r}")
        _, off, length = candidates[-1]
        return self._read_at(building_id, off, length)

    def nearest(self, building_id: str, t: float) -> ThermalFrame:
        """Frame whose timestamp is closest to t (earlier wins ties)."""
        entries = self._entries(building_id)
        if not entries:
            raise NoFramesError(f"no frames stored for building {building_id!r}")
        best = min(entries, key=lambda e: (abs(e[0] - t), e[0]))
        return self._read_at(building_id, best[1], best[2])


@dataclass(frozen=True)
class PlaybackPlan:
    """Frame sequence plus presentation times rescaled by the speed factor."""

    building_id: str
    t0: float
    t1: float
    speed: float
    frame_times: tuple[float, ...]
    presentation_times: tuple[float, ...]


def playback(store: FrameStore, building_id: str, t0: float, t1: float, speed: float) -> PlaybackPlan:
    """Map stored gaps onto presentation gaps: spans shrink by 1/speed."""
    if speed <= 0:
        raise ValueError(f"playback speed must be positive, got {speed}")
    frames = store.query_range(building_id, t0, t1)
    if not frames:
        raise NoFramesError(f"no frames in [{t0}, {t1}] for building {building_id!r}")
    times = tuple(f.t for f in frames)
    return PlaybackPlan(
        building_id=building_id,
        t0=t0,
        t1=t1,
        speed=speed,
        frame_times=times,
        presentation_times=tuple((t - t0) / speed for t in times),
    )


class Supervisor:
    """Collects room readings for one building and seals them into frames."""

    def __init__(
        self,
        model: BuildingModel,
        placements: Iterable[SensorPlacement],
        store: FrameStore,
        *,
        poll_period: float = 1.0,
        grace_factor: float = 2.0,
    ):
        self.model = model
        self.store = store
        self.grace = grace_factor * poll_period
        self.positions: dict[str, Vec3] = {p.sensor_id: p.position for p in placements}
        self.room_ids = {room.id for room in model.rooms}
        self.roster_size = len(self.positions)
        # cycle timestamp -> room_id -> reading, sealed strictly in t order
        self._pending: dict[float, dict[str, RoomReading]] = {}
        self._last_sealed_t: float | None = None
        self.rejected = 0

    def ingest(self, reading: RoomReading) -> None:
        """Buffer one room reading; seal its cycle once complete and oldest."""
        if reading.room_id not in self.room_ids:
            log.warning("rejected reading from unregistered room %r", reading.room_id)
            self.rejected += 1
            return
        if self._last_sealed_t is not None and reading.t <= self._last_sealed_t:
            log.warning(
                "rejected late reading for room %r at t=%s (sealed through %s)",
                reading.room_id, reading.t, self._last_sealed_t,
            )
            self.rejected += 1
            return
        bucket = self._pending.setdefault(reading.t, {})
        if reading.room_id in bucket:
            log.warning("rejected duplicate reading for (%r, t=%s)", reading.room_id, reading.t)
            self.rejected += 1
            return
        bucket[reading.room_id] = reading
        self._seal_ready()

    def _seal_ready(self) -> None:
        """Seal complete buckets, oldest first, stopping at the first gap."""
        while self._pending:
            oldest = min(self._pending)
            if len(self._pending[oldest]) < len(self.room_ids):
                return
            self._seal(oldest)

    def _seal(self, t: float) -> None:
        bucket = self._pending.pop(t)
        samples: dict[str, tuple[Vec3, float, float]] = {}
        for room_id in sorted(bucket):
            for sample in bucket[room_id].samples:
                position = self.positions.get(sample.sensor_id)
                if position is None:
                    log.warning("dropping sample from unknown sensor %r", sample.sensor_id)
                    continue
                samples[sample.sensor_id] = (position, sample.temp, sample.rh)
        frame = ThermalFrame(
            building_id=self.model.id,
            t=t,
            samples=samples,
            completeness=len(samples) / self.roster_size if self.roster_size else 0.0,
        )
        self.store.append(frame)
        self._last_sealed_t = t

    def advance(self, now: float) -> None:
        """Seal every cycle whose grace window has lapsed by virtual time now."""
        for t in sorted(self._pending):
            if t <= now - self.grace:
                self._seal(t)
        # A lapsed gap may have been holding back younger complete cycles.
        self._seal_ready()

    def flush(self) -> None:
        """Seal everything still pending (end of run)."""
        for t in sorted(self._pending):
            self._seal(t)

    def live_frame(self) -> ThermalFrame:
        try:
            return self.store.latest(self.model.id)
        except UnknownBuildingError:
            raise NoFramesError(f"no frames sealed yet for building {self.model.id!r}") from None
