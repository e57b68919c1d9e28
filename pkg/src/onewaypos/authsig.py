"""Beacon encoding, signature providers and the station key registry.

Wire layout of a beacon body (all integers little-endian, signed)::

    b"UPS1" | dims:u8 | t_s:i64 ps | coord:i64 um  (x dims) | station_id:16 bytes

The magic string versions the layout.  A signature always covers exactly
these bytes.
"""
from __future__ import annotations

import hashlib
import hmac
import struct
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey

from .errors import DecodeError, EncodingOverflow
from .geom import Point, as_point
from .timebase import Instant

MAGIC = b"UPS1"
ID_LEN = 16
MICRO = 1_000_000
_I64 = 2**63


def station_id(name: str | bytes) -> bytes:
    """Pad a short human-readable name to a 16-byte station id."""
    raw = name.encode("utf-8") if isinstance(name, str) else bytes(name)
    if len(raw) > ID_LEN or b"\x00" in raw:
        raise ValueError(f"station name {name!r} must be <= 16 bytes without NUL")
    return raw.ljust(ID_LEN, b"\x00")


def station_name(sid: bytes) -> str:
    return sid.rstrip(b"\x00").decode("utf-8", errors="replace")


def quantize(p: Point) -> Point:
    """Snap a position onto the micrometre grid the encoding carries."""
    return Point(tuple(round(c * MICRO) / MICRO for c in p.coords))


@dataclass(frozen=True)
class BeaconBody:
    station_id: bytes
    t_s: Instant
    x_s: Point

    def __post_init__(self):
        if len(self.station_id) != ID_LEN:
            raise ValueError(f"station_id must be {ID_LEN} bytes")
        object.__setattr__(self, "x_s", as_point(self.x_s))


@dataclass(frozen=True)
class Broadcast:
    body: BeaconBody
    signature: bytes


def encode_body(body: BeaconBody) -> bytes:
    coords = []
    for c in body.x_s.coords:
        um = round(c * MICRO)
        if not -_I64 < um < _I64:
            raise EncodingOverflow(f"coordinate {c} m does not fit in 64-bit micrometres")
        coords.append(um)
    return (MAGIC + struct.pack("<Bq", body.x_s.dims, body.t_s.ticks)
            + struct.pack(f"<{len(coords)}q", *coords) + body.station_id)


def decode_body(data: bytes) -> BeaconBody:
    if data[:4] != MAGIC:
        raise DecodeError("bad magic")
    if len(data) < 5:
        raise DecodeError("truncated header")
    dims = data[4]
    if dims not in (2, 3):
        raise DecodeError(f"dims byte {dims}")
    expected = 4 + 1 + 8 + 8 * dims + ID_LEN
    if len(data) != expected:
        raise DecodeError(f"length {len(data)} != {expected}")
    (ticks,) = struct.unpack_from("<q", data, 5)
    coords = struct.unpack_from(f"<{dims}q", data, 13)
    sid = data[13 + 8 * dims:]
    return BeaconBody(sid, Instant(ticks), Point(tuple(c / MICRO for c in coords)))


def is_canonical(body: BeaconBody) -> bool:
    """True when the body is exactly what its encoding decodes back to."""
    try:
        return decode_body(encode_body(body)) == body
    except (EncodingOverflow, DecodeError):
        return False


# ------------------------------------------------------------------ schemes


class Ed25519Scheme:
    """Real asymmetric signatures (RFC 8032)."""

    name = "ed25519"
    signature_length = 64

    def keypair(self, seed: bytes):
        priv = Ed25519PrivateKey.from_private_bytes(hashlib.sha256(seed).digest())
        pub = priv.public_key().public_bytes(serialization.Encoding.Raw, serialization.PublicFormat.Raw)
        return priv, pub

    def sign(self, private_key: Ed25519PrivateKey, message: bytes) -> bytes:
        return private_key.sign(message)

    def verify(self, public_key: bytes, message: bytes, signature: bytes) -> bool:
        if len(signature) != self.signature_length:
            return False
        try:
            Ed25519PublicKey.from_public_bytes(public_key).verify(signature, message)
        except (InvalidSignature, ValueError):
            return False
        return True


class HmacScheme:
    """Keyed-MAC stand-in (HMAC-SHA256).  Symmetric: the "public" key is the
    secret, so it only suits simulations and fast property tests."""

    name = "hmac"
    signature_length = 32

    def keypair(self, seed: bytes):
        key = hashlib.sha256(b"hmac-key|" + seed).digest()
        return key, key

    def sign(self, private_key: bytes, message: bytes) -> bytes:
        return hmac.new(private_key, message, hashlib.sha256).digest()

    def verify(self, public_key: bytes, message: bytes, signature: bytes) -> bool:
        if len(signature) != self.signature_length:
            return False
        return hmac.compare_digest(self.sign(public_key, message), signature)


SCHEMES = {"ed25519": Ed25519Scheme(), "hmac": HmacScheme()}


def get_scheme(name: str):
    try:
        return SCHEMES[name]
    except KeyError:
        raise ValueError(f"unknown signature scheme {name!r}; choose from {sorted(SCHEMES)}") from None


class KeyRegistry:
    """Station id -> authentic public key.  Immutable once built."""

    def __init__(self, entries=(), scheme=None):
        self.scheme = scheme or SCHEMES["ed25519"]
        keys = {}
        items = entries.items() if isinstance(entries, Mapping) else entries
        for sid, pub in items:
            sid = station_id(sid) if isinstance(sid, str) else bytes(sid)
            if sid in keys:
                raise ValueError(f"duplicate key for station {station_name(sid)!r}")
            keys[sid] = bytes(pub)
        self._keys = MappingProxyType(keys)

    def get(self, sid: bytes):
        return self._keys.get(sid)

    def __contains__(self, sid) -> bool:
        return sid in self._keys

    def __len__(self) -> int:
        return len(self._keys)

    def ids(self):
        return list(self._keys)


def sign_beacon(private_key, body: BeaconBody, scheme=None) -> Broadcast:
    scheme = scheme or SCHEMES["ed25519"]
    return Broadcast(body, scheme.sign(private_key, encode_body(body)))


def verify_beacon(registry: KeyRegistry, b: Broadcast) -> bool:
    """Fail-closed signature check: unknown stations, non-canonical bodies and
    malformed signatures are all simply ``False``."""
    pub = registry.get(b.body.station_id)
    if pub is None:
        return False
    try:
        message = encode_body(b.body)
    except EncodingOverflow:
        return False
    if not is_canonical(b.body):
        return False
    return registry.scheme.verify(pub, message, b.signature)
