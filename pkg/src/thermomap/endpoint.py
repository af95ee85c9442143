"""Tier-1 sensor endpoints: sampling, ring buffering, register protocol.

Each endpoint is a small sequential state machine around a simulated
temperature/relative-humidity part: it samples a ground-truth field with
Gaussian measurement noise, quantizes to fixed-point wire units, keeps the
last 600 records in a circular FIFO, and exposes a register file over a
byte-framed point-to-point link shared by all endpoints in a room.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterator

from thermomap.field import RH_RANGE, TEMP_RANGE
from thermomap.geometry import Vec3

BUFFER_CAPACITY = 600

TEMP_RAW_MAX = 16380  # (123.8 + 40) * 100
RH_RAW_MAX = 10000

SIGMA_TEMP = 0.005  # deg C; accuracy spec 0.01 treated as the 2-sigma band
SIGMA_RH = 0.667  # %RH; 3 sigma ~= the +/-2% accuracy band

# Register map (u16 values).
REG_DEVICE_ID = 0x00
REG_STATUS = 0x01
REG_TEMP_LATEST = 0x02
REG_RH_LATEST = 0x03
REG_BUFFER_COUNT = 0x04
REG_SEQ_LATEST = 0x05
REG_CMD = 0x10

READABLE_REGS = frozenset(
    {REG_DEVICE_ID, REG_STATUS, REG_TEMP_LATEST, REG_RH_LATEST, REG_BUFFER_COUNT, REG_SEQ_LATEST}
)

CMD_SYNC = 1
CMD_SAMPLE_NOW = 2

STATUS_SATURATED = 0x0001
STATUS_BUFFER_FULL = 0x0002

# Link frame opcodes / status codes.
OP_READ = 0x01
OP_WRITE = 0x02
OP_RESPONSE = 0x80
ST_ACK = 0
ST_NACK = 1

REQUEST_SIZE = 7
RESPONSE_SIZE = 8

BATTERY_VOLTAGE = 1.8  # informational only
POWER_DRAW_MW = 3.0  # informational only

TruthFn = Callable[[Vec3, float], tuple[float, float]]


class FrameError(ValueError):
    """Undecodable link frame (bad length or checksum)."""


def encode_sample(temp: float, rh: float) -> tuple[int, int]:
    """Quantize (deg C, %RH) to u16 wire units, saturating out of range."""
    temp_raw = round((temp + 40.0) * 100.0)
    rh_raw = round(rh * 100.0)
    return (
        min(max(temp_raw, 0), TEMP_RAW_MAX),
        min(max(rh_raw, 0), RH_RAW_MAX),
    )


def decode_sample(temp_raw: int, rh_raw: int) -> tuple[float, float]:
    """Inverse of encode_sample, exact on every in-range code."""
    if not 0 <= temp_raw <= TEMP_RAW_MAX:
        raise ValueError(f"temp_raw {temp_raw} out of range 0..{TEMP_RAW_MAX}")
    if not 0 <= rh_raw <= RH_RAW_MAX:
        raise ValueError(f"rh_raw {rh_raw} out of range 0..{RH_RAW_MAX}")
    return temp_raw / 100.0 - 40.0, rh_raw / 100.0


def encode_saturates(temp: float, rh: float) -> bool:
    return not (TEMP_RANGE[0] <= temp <= TEMP_RANGE[1] and RH_RANGE[0] <= rh <= RH_RANGE[1])


@dataclass(frozen=True)
class SensorRecord:
    """One buffered measurement in wire units; sensor_id is the link address."""

    sensor_id: int
    seq: int
    t: float
    temp_raw: int
    rh_raw: int


class RingBuffer:
    """Fixed-capacity FIFO of records; overflow evicts the oldest."""

    def __init__(self, capacity: int = BUFFER_CAPACITY):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._items: deque[SensorRecord] = deque(maxlen=capacity)

    def push(self, record: SensorRecord) -> None:
        self._items.append(record)

    def latest(self) -> SensorRecord | None:
        return self._items[-1] if self._items else None

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[SensorRecord]:
        """Oldest-first iteration."""
        return iter(self._items)


class Endpoint:
    """One sensor node: sampler, 600-record buffer, register file."""

    def __init__(
        self,
        sensor_id: str,
        addr: int,
        position: Vec3,
        truth: TruthFn,
        *,
        sample_period: float = 1.0,
        seed: int = 0,
        noise: bool = True,
    ):
        if not 0 <= addr <= 0xFF:
            raise ValueError(f"link address {addr} out of u8 range")
        if sample_period <= 0:
            raise ValueError("sample_period must be positive")
        self.sensor_id = sensor_id
        self.addr = addr
        self.position = position
        self.truth = truth
        self.sample_period = sample_period
        self.noise = noise
        self.rng = random.Random(f"{seed}:{sensor_id}")
        self.buffer = RingBuffer()
        self.seq = 0
        self.next_due = 0.0
        self.battery_voltage = BATTERY_VOLTAGE
        self.power_draw_mw = POWER_DRAW_MW
        self.registers: dict[int, int] = {
            REG_DEVICE_ID: addr,
            REG_STATUS: 0,
            REG_TEMP_LATEST: 0,
            REG_RH_LATEST: 0,
            REG_BUFFER_COUNT: 0,
            REG_SEQ_LATEST: 0,
        }

    def sample_tick(self, t: float) -> SensorRecord:
        """Measure the field at this node's position and buffer the record."""
        temp, rh = self.truth(self.position, t)
        if self.noise:
            temp += self.rng.gauss(0.0, SIGMA_TEMP)
            rh += self.rng.gauss(0.0, SIGMA_RH)
        status = self.registers[REG_STATUS] & ~STATUS_SATURATED
        if encode_saturates(temp, rh):
            status |= STATUS_SATURATED
        temp_raw, rh_raw = encode_sample(
            min(max(temp, TEMP_RANGE[0]), TEMP_RANGE[1]),
            min(max(rh, RH_RANGE[0]), RH_RANGE[1]),
        )
        record = SensorRecord(self.addr, self.seq, t, temp_raw, rh_raw)
        self.buffer.push(record)
        self.seq += 1
        if len(self.buffer) == self.buffer.capacity:
            status |= STATUS_BUFFER_FULL
        self.registers[REG_STATUS] = status
        self.registers[REG_TEMP_LATEST] = temp_raw
        self.registers[REG_RH_LATEST] = rh_raw
        self.registers[REG_BUFFER_COUNT] = len(self.buffer)
        self.registers[REG_SEQ_LATEST] = record.seq & 0xFFFF
        return record

    def advance_to(self, t: float) -> None:
        """Run all self-scheduled samples due at or before virtual time t."""
        while self.next_due <= t:
            self.sample_tick(self.next_due)
            self.next_due += self.sample_period

    def register_read(self, addr: int) -> tuple[int, int]:
        """Return (status, value); reads never mutate sampling state."""
        if addr not in READABLE_REGS:
            return ST_NACK, 0
        return ST_ACK, self.registers[addr]

    def register_write(self, addr: int, value: int, now: float) -> tuple[int, int]:
        if addr != REG_CMD:
            return ST_NACK, 0
        if value == CMD_SYNC:
            # Align the sampling phase to the shared epoch: next sample lands
            # on the next whole multiple of the period.
            aligned = math.floor(now / self.sample_period) * self.sample_period
            if aligned < now:
                aligned += self.sample_period
            self.next_due = aligned
            return ST_ACK, 0
        if value == CMD_SAMPLE_NOW:
            record = self.sample_tick(now)
            return ST_ACK, record.seq & 0xFFFF
        return ST_NACK, 0


def _checksum(payload: bytes) -> int:
    out = 0
    for b in payload:
        out ^= b
    return out


def build_request(op: int, sensor_addr: int, reg: int, value: int = 0) -> bytes:
    body = bytes([op, sensor_addr]) + reg.to_bytes(2, "big") + value.to_bytes(2, "big")
    return body + bytes([_checksum(body)])


def parse_request(frame: bytes) -> tuple[int, int, int, int]:
    """-> (op, sensor_addr, reg, value); raises FrameError on corruption."""
    if len(frame) != REQUEST_SIZE:
        raise FrameError(f"request frame must be {REQUEST_SIZE} bytes, got {len(frame)}")
    if _checksum(frame[:-1]) != frame[-1]:
        raise FrameError("request checksum mismatch")
    op, sensor_addr = frame[0], frame[1]
    if op not in (OP_READ, OP_WRITE):
        raise FrameError(f"unknown opcode 0x{op:02x}")
    return op, sensor_addr, int.from_bytes(frame[2:4], "big"), int.from_bytes(frame[4:6], "big")


def build_response(op: int, sensor_addr: int, reg: int, value: int, status: int) -> bytes:
    body = (
        bytes([op | OP_RESPONSE, sensor_addr])
        + reg.to_bytes(2, "big")
        + value.to_bytes(2, "big")
        + bytes([status])
    )
    return body + bytes([_checksum(body)])


def parse_response(frame: bytes) -> tuple[int, int, int, int, int]:
    """-> (op, sensor_addr, reg, value, status)."""
    if len(frame) != RESPONSE_SIZE:
        raise FrameError(f"response frame must be {RESPONSE_SIZE} bytes, got {len(frame)}")
    if _checksum(frame[:-1]) != frame[-1]:
        raise FrameError("response checksum mismatch")
    op = frame[0]
    if not op & OP_RESPONSE:
        raise FrameError("response bit not set")
    return (
        op & ~OP_RESPONSE,
        frame[1],
        int.from_bytes(frame[2:4], "big"),
        int.from_bytes(frame[4:6], "big"),
        frame[6],
    )


class RoomLink:
    """In-process star link between one concentrator and its room endpoints.

    Latency is virtual bookkeeping, loss is Bernoulli per transaction (either
    direction), and byte counters feed the bandwidth budget check.
    """

    def __init__(self, room_id: str, *, seed: int = 0, latency: float = 0.0, loss: float = 0.0):
        self.room_id = room_id
        self.latency = latency
        self.loss = loss
        self._loss_override: dict[int, float] = {}
        self.rng = random.Random(f"{seed}:link:{room_id}")
        self.endpoints: dict[int, Endpoint] = {}
        self.frames_sent = 0
        self.frames_to: dict[int, int] = {}
        self.bytes_transferred = 0

    def attach(self, endpoint: Endpoint) -> None:
        if endpoint.addr in self.endpoints:
            raise ValueError(f"link address {endpoint.addr} already attached")
        self.endpoints[endpoint.addr] = endpoint
        self.frames_to[endpoint.addr] = 0

    def set_loss(self, addr: int, probability: float) -> None:
        self._loss_override[addr] = probability

    def _dropped(self, addr: int) -> bool:
        p = self._loss_override.get(addr, self.loss)
        return p > 0.0 and self.rng.random() < p

    def transact(self, request: bytes, now: float) -> bytes | None:
        """Send one request frame; returns the response or None on loss."""
        op, sensor_addr, reg, value = parse_request(request)
        self.frames_sent += 1
        self.bytes_transferred += len(request)
        if sensor_addr in self.frames_to:
            self.frames_to[sensor_addr] += 1
        endpoint = self.endpoints.get(sensor_addr)
        if endpoint is None or self._dropped(sensor_addr):
            return None
        if op == OP_READ:
            status, out = endpoint.register_read(reg)
        else:
            status, out = endpoint.register_write(reg, value, now)
        if self._dropped(sensor_addr):
            return None
        response = build_response(op, sensor_addr, reg, out, status)
        self.bytes_transferred += len(response)
        return response
