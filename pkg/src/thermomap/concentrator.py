"""Tier-2 room concentrators: cadenced polling and the upstream read protocol.

A concentrator owns the star link to its room's endpoints, polls every
roster member once per cycle for the latest reading, and answers
read-property requests from the building supervisor over a length-prefixed
binary frame carrying JSON payloads. A debug tap gives maintenance tools raw
register access to a single endpoint, bypassing the poll cache.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any

from thermomap.endpoint import (
    OP_READ,
    OP_WRITE,
    REG_RH_LATEST,
    REG_SEQ_LATEST,
    REG_TEMP_LATEST,
    ST_ACK,
    RoomLink,
    build_request,
    decode_sample,
    parse_response,
)
from thermomap.field import SensorSample

POLL_PERIOD_SHORT = 1.0
POLL_PERIOD_MEDIUM = 60.0

READ_TIMEOUT = 0.1  # virtual seconds per endpoint read
READ_RETRIES = 1

# Upstream frame opcodes and error codes.
UPLINK_VERSION = 1
UP_OP_READ = 0x10
UP_OP_RESPONSE = 0x90
UP_OP_ERROR = 0xE0

ERR_UNKNOWN_PROPERTY = 1
ERR_UNKNOWN_SENSOR = 2
ERR_UNKNOWN_ROOM = 3
ERR_BAD_REQUEST = 4

ERROR_NAMES = {
    ERR_UNKNOWN_PROPERTY: "UNKNOWN_PROPERTY",
    ERR_UNKNOWN_SENSOR: "UNKNOWN_SENSOR",
    ERR_UNKNOWN_ROOM: "UNKNOWN_ROOM",
    ERR_BAD_REQUEST: "BAD_REQUEST",
}

_SENSOR_LATEST = re.compile(r"^sensor_latest\((?P<sid>[^()]+)\)$")

_POLL_REGS = (REG_TEMP_LATEST, REG_RH_LATEST, REG_SEQ_LATEST)


class UplinkError(ValueError):
    """Undecodable upstream frame."""


@dataclass(frozen=True)
class RoomReading:
    """One poll cycle's yield: decoded samples plus the sensors that missed."""

    room_id: str
    t: float
    samples: tuple[SensorSample, ...]
    missing: tuple[str, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "room_id": self.room_id,
            "t": self.t,
            "samples": [
                {"sensor_id": s.sensor_id, "t": s.t, "temp": s.temp, "rh": s.rh, "seq": s.seq}
                for s in self.samples
            ],
            "missing": list(self.missing),
        }


def reading_from_dict(data: dict[str, Any]) -> RoomReading:
    return RoomReading(
        room_id=data["room_id"],
        t=float(data["t"]),
        samples=tuple(
            SensorSample(s["sensor_id"], float(s["t"]), float(s["temp"]), float(s["rh"]), s.get("seq"))
            for s in data["samples"]
        ),
        missing=tuple(data["missing"]),
    )


@dataclass(frozen=True)
class PropertyRequest:
    room_id: str
    prop: str


@dataclass(frozen=True)
class PropertyResponse:
    room_id: str
    prop: str
    payload: Any = None
    error: int | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


class DebugTap:
    """Raw register session to one endpoint, bypassing the poll cache."""

    def __init__(self, link: RoomLink, addr: int, clock):
        self._link = link
        self._addr = addr
        self._clock = clock

    def read(self, reg: int) -> int | None:
        response = self._link.transact(build_request(OP_READ, self._addr, reg), self._clock.now)
        if response is None:
            return None
        _, _, _, value, status = parse_response(response)
        return value if status == ST_ACK else None

    def write(self, reg: int, value: int) -> bool:
        response = self._link.transact(
            build_request(OP_WRITE, self._addr, reg, value), self._clock.now
        )
        if response is None:
            return False
        *_, status = parse_response(response)
        return status == ST_ACK


class Concentrator:
    """Per-room gateway: polls the roster downstream, serves reads upstream."""

    def __init__(
        self,
        room_id: str,
        link: RoomLink,
        roster: dict[int, str],
        *,
        poll_period: float = POLL_PERIOD_SHORT,
        clock=None,
    ):
        if not roster:
            raise ValueError("concentrator roster must not be empty")
        if poll_period <= 0:
            raise ValueError("poll_period must be positive")
        self.room_id = room_id
        self.link = link
        self.roster = dict(roster)
        self.poll_period = poll_period
        self.clock = clock
        self.last_cycle: RoomReading | None = None
        self._by_name = {name: addr for addr, name in roster.items()}

    def _read_register(self, addr: int, reg: int, t: float) -> int | None:
        """One register read with a single retry after a virtual timeout."""
        for attempt in range(1 + READ_RETRIES):
            response = self.link.transact(build_request(OP_READ, addr, reg), t + attempt * READ_TIMEOUT)
            if response is None:
                continue
            _, _, _, value, status = parse_response(response)
            if status == ST_ACK:
                return value
        return None

    def poll_cycle(self, t: float) -> RoomReading:
        """Poll every roster endpoint once for its latest decoded reading."""
        samples: list[SensorSample] = []
        missing: list[str] = []
        for addr in sorted(self.roster):
            name = self.roster[addr]
            values: dict[int, int] = {}
            for reg in _POLL_REGS:
                value = self._read_register(addr, reg, t)
                if value is None:
                    break
                values[reg] = value
            if len(values) < len(_POLL_REGS):
                missing.append(name)
                continue
            temp, rh = decode_sample(values[REG_TEMP_LATEST], values[REG_RH_LATEST])
            samples.append(SensorSample(name, t, temp, rh, seq=values[REG_SEQ_LATEST]))
        reading = RoomReading(self.room_id, t, tuple(samples), tuple(missing))
        self.last_cycle = reading
        return reading

    def serve_read_property(self, req: PropertyRequest) -> PropertyResponse:
        """Answer from the last poll snapshot; never touches the room link."""
        if req.room_id != self.room_id:
            return PropertyResponse(req.room_id, req.prop, error=ERR_UNKNOWN_ROOM)
        if req.prop == "latest_cycle":
            if self.last_cycle is None:
                return PropertyResponse(req.room_id, req.prop, payload=None)
            return PropertyResponse(req.room_id, req.prop, payload=self.last_cycle.to_dict())
        if req.prop == "roster":
            return PropertyResponse(
                req.room_id, req.prop, payload=[self.roster[a] for a in sorted(self.roster)]
            )
        if req.prop == "poll_period":
            return PropertyResponse(req.room_id, req.prop, payload=self.poll_period)
        match = _SENSOR_LATEST.match(req.prop)
        if match:
            sid = match.group("sid")
            if sid not in self._by_name:
                return PropertyResponse(req.room_id, req.prop, error=ERR_UNKNOWN_SENSOR)
            if self.last_cycle is not None:
                for sample in self.last_cycle.samples:
                    if sample.sensor_id == sid:
                        return PropertyResponse(
                            req.room_id,
                            req.prop,
                            payload={
                                "sensor_id": sample.sensor_id,
                                "t": sample.t,
                                "temp": sample.temp,
                                "rh": sample.rh,
                                "seq": sample.seq,
                            },
                        )
            return PropertyResponse(req.room_id, req.prop, payload=None)
        return PropertyResponse(req.room_id, req.prop, error=ERR_UNKNOWN_PROPERTY)

    def debug_tap(self, sensor_id: str) -> DebugTap:
        if sensor_id not in self._by_name:
            raise KeyError(f"unknown sensor {sensor_id!r} in room {self.room_id!r}")
        return DebugTap(self.link, self._by_name[sensor_id], self.clock)


def _lp(text: str) -> bytes:
    raw = text.encode("utf-8")
    if len(raw) > 0xFF:
        raise UplinkError(f"string too long for frame: {len(raw)} bytes")
    return bytes([len(raw)]) + raw


def _frame(body: bytes) -> bytes:
    return len(body).to_bytes(4, "big") + body


def encode_read_property(room_id: str, prop: str) -> bytes:
    return _frame(bytes([UPLINK_VERSION, UP_OP_READ]) + _lp(room_id) + _lp(prop))


def encode_response(room_id: str, prop: str, payload: Any) -> bytes:
    payload_bytes = json.dumps(payload, sort_keys=True).encode("utf-8")
    return _frame(bytes([UPLINK_VERSION, UP_OP_RESPONSE]) + _lp(room_id) + _lp(prop) + payload_bytes)


def encode_error(room_id: str, prop: str, code: int) -> bytes:
    return _frame(
        bytes([UPLINK_VERSION, UP_OP_ERROR]) + _lp(room_id) + _lp(prop) + code.to_bytes(2, "big")
    )


@dataclass(frozen=True)
class UplinkFrame:
    version: int
    op: int
    room_id: str
    prop: str
    payload: Any = None
    error: int | None = None


def decode_frame(data: bytes) -> UplinkFrame:
    if len(data) < 4:
        raise UplinkError("frame shorter than its length prefix")
    length = int.from_bytes(data[:4], "big")
    body = data[4:]
    if len(body) != length:
        raise UplinkError(f"frame length {len(body)} != declared {length}")
    if length < 2:
        raise UplinkError("frame body too short")
    version, op = body[0], body[1]
    if version != UPLINK_VERSION:
        raise UplinkError(f"unsupported frame version {version}")
    pos = 2

    def take_str() -> str:
        nonlocal pos
        if pos >= len(body):
            raise UplinkError("truncated string field")
        n = body[pos]
        pos += 1
        if pos + n > len(body):
            raise UplinkError("truncated string field")
        out = body[pos : pos + n].decode("utf-8")
        pos += n
        return out

    room_id = take_str()
    prop = take_str()
    rest = body[pos:]
    if op == UP_OP_READ:
        return UplinkFrame(version, op, room_id, prop)
    if op == UP_OP_RESPONSE:
        payload = json.loads(rest.decode("utf-8")) if rest else None
        return UplinkFrame(version, op, room_id, prop, payload=payload)
    if op == UP_OP_ERROR:
        if len(rest) != 2:
            raise UplinkError("error frame must carry a 2-byte code")
        return UplinkFrame(version, op, room_id, prop, error=int.from_bytes(rest, "big"))
    raise UplinkError(f"unknown uplink opcode 0x{op:02x}")


class LevelBus:
    """Shared per-level uplink: routes read-property frames to room DCs."""

    def __init__(self, level_index: int):
        self.level_index = level_index
        self.concentrators: dict[str, Concentrator] = {}
        self.bytes_transferred = 0
        self.frames_routed = 0

    def attach(self, dc: Concentrator) -> None:
        if dc.room_id in self.concentrators:
            raise ValueError(f"room {dc.room_id!r} already on bus {self.level_index}")
        self.concentrators[dc.room_id] = dc

    def request(self, room_id: str, prop: str) -> PropertyResponse:
        """Full round trip through the wire encoding, as the supervisor sees it."""
        wire = encode_read_property(room_id, prop)
        self.bytes_transferred += len(wire)
        self.frames_routed += 1
        frame = decode_frame(wire)
        dc = self.concentrators.get(frame.room_id)
        if dc is None:
            reply = encode_error(frame.room_id, frame.prop, ERR_UNKNOWN_ROOM)
        else:
            response = dc.serve_read_property(PropertyRequest(frame.room_id, frame.prop))
            if response.ok:
                reply = encode_response(frame.room_id, frame.prop, response.payload)
            else:
                reply = encode_error(frame.room_id, frame.prop, response.error)
        self.bytes_transferred += len(reply)
        decoded = decode_frame(reply)
        if decoded.op == UP_OP_ERROR:
            return PropertyResponse(decoded.room_id, decoded.prop, error=decoded.error)
        return PropertyResponse(decoded.room_id, decoded.prop, payload=decoded.payload)
