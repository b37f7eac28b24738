"""
Known-answer vectors.

A fixed set of (ID, PW, RN, LUT seed, plaintext) tuples run through every
stage of the protocol. The resulting file is line-oriented `name = hexvalue`
records with '#' comments; each vector opens with a `vector` record. All
doubles are written as 8-byte big-endian IEEE-754 patterns, so the file is
byte-identical on every platform.

The ID and PW below are published test values, not secrets.
"""
import hashlib
import io
import logging
import struct
from dataclasses import dataclass
from typing import BinaryIO, Dict, List

from .cipher_core import FinalCipher, apply_permutation, encode_transit, stable_order_permutation, to_nibbles
from .digest_schedule import (
    Credentials,
    SessionNonce,
    build_long_digest,
    extract_selectors,
    seed_digest,
)
from .memristor_image import generate_image, save_image
from .wire_protocol import encode_frame

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KnownAnswerInput:
    device_id: bytes
    password: bytes
    rn: bytes
    seed64: int
    plaintext: bytes


KAT_INPUTS = (
    KnownAnswerInput(b"device-0001", b"Keyless-PW", bytes(range(16)), 0, b"Keyless"),
    KnownAnswerInput(b"sensor-node-17", b"correct horse battery staple", b"\xff" * 16,
                     0x0123456789ABCDEF, b"\x00"),
    KnownAnswerInput(b"twin", b"twin", bytes(16), 1, bytes(range(119))),
    KnownAnswerInput(b"a" * 40, b"pw", b"\xa5" * 16, (1 << 64) - 1, b"\xff\xf0\x0f"),
)

FIELD_ORDER = (
    "vector", "id", "pw", "rn", "seed64", "plaintext", "lut_sha256", "seed_digest", "long_digest",
    "selectors", "nibbles", "resistances", "transit", "final", "frame",
)


def _doubles(values) -> str:
    return struct.pack(f">{len(values)}d", *values).hex()


def build_vector(index: int, entry: KnownAnswerInput) -> Dict[str, str]:
    """Run one input tuple through every stage and return its hex records."""
    cred = Credentials.from_raw(entry.device_id, entry.password)
    rn = SessionNonce(entry.rn)
    image = generate_image(entry.seed64)
    lut = io.BytesIO()
    save_image(image, lut)

    seed = seed_digest(cred, rn)
    lmd = build_long_digest(seed)
    nibbles = to_nibbles(entry.plaintext)
    selectors = extract_selectors(lmd, len(nibbles) + 1)
    resistances = image.read_cells(selectors)
    transit = encode_transit(nibbles, resistances)
    p = stable_order_permutation([s.order for s in selectors])
    final = FinalCipher(tuple(apply_permutation(transit.values, p)))

    return {
        "vector": f"{index:02x}",
        "id": entry.device_id.hex(),
        "pw": entry.password.hex(),
        "rn": entry.rn.hex(),
        "seed64": f"{entry.seed64:016x}",
        "plaintext": entry.plaintext.hex(),
        "lut_sha256": hashlib.sha256(lut.getvalue()).hexdigest(),
        "seed_digest": seed.hex(),
        "long_digest": lmd.hex(),
        "selectors": bytes(v for s in selectors for v in (s.address, s.current, s.order)).hex(),
        "nibbles": bytes(nibbles).hex(),
        "resistances": _doubles(resistances.tolist()),
        "transit": _doubles(transit.values),
        "final": _doubles(final.values),
        "frame": encode_frame(rn, final).hex(),
    }


def build_vectors() -> List[Dict[str, str]]:
    return [build_vector(i, entry) for i, entry in enumerate(KAT_INPUTS)]


def write_kat(sink: BinaryIO) -> int:
    """Write every vector; returns the number of bytes written."""
    lines = [
        "# keyless known-answer vectors",
        "# doubles: IEEE-754 binary64, big-endian; selectors: (address, current, order) byte triples",
    ]
    for record in build_vectors():
        lines.append("")
        lines.extend(f"{name} = {record[name]}" for name in FIELD_ORDER)
    payload = ("\n".join(lines) + "\n").encode("utf-8")
    sink.write(payload)
    logger.info(f"Wrote {len(KAT_INPUTS)} known-answer vectors")
    return len(payload)


def read_kat(source: BinaryIO) -> List[Dict[str, str]]:
    """Parse a KAT file back into one dict of hex strings per vector."""
    records: List[Dict[str, str]] = []
    for line in source.read().decode("utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, _, value = line.partition("=")
        name, value = name.strip(), value.strip()
        if name == "vector":
            records.append({})
        if not records:
            raise ValueError(f"record {name!r} appears before any vector")
        records[-1][name] = value
    return records


def unpack_doubles(hex_value: str) -> List[float]:
    raw = bytes.fromhex(hex_value)
    return list(struct.unpack(f">{len(raw) // 8}d", raw))
