"""
Wire protocol: message frames, nonce handling and the sender/receiver exchange.

Frame layout (big-endian):

    magic   4 bytes  b"KEM1"
    version 1 byte   0x01
    rn      16 bytes
    count   uint16   odd, 3..239
    values  count x IEEE-754 double

On a stream every frame is preceded by a uint32 byte-length prefix. The RN
travels in clear; ID and PW never leave the endpoint.
"""
import asyncio
import logging
import math
import secrets
import struct
from pathlib import Path
from typing import Optional, Tuple

from .cipher_core import (
    MAX_CIPHER_LEN,
    MIN_CIPHER_LEN,
    FinalCipher,
    check_cipher_length,
    decrypt_message,
    encrypt_message,
)
from .digest_schedule import NONCE_SIZE, Credentials, SessionNonce
from .errors import (
    CorruptFrame,
    MalformedFrame,
    NoSavedNonce,
    NonceFormatError,
    TransportError,
    UnsupportedVersion,
    WrongProtocol,
)
from .memristor_image import MemristorImage

logger = logging.getLogger(__name__)

MAGIC = b"KEM1"
VERSION = 0x01
HEADER = struct.Struct(">4sB16sH")
LENGTH_PREFIX = struct.Struct(">I")
MAX_FRAME_SIZE = HEADER.size + 8 * MAX_CIPHER_LEN

NONCE_MODES = ("saved", "provided", "system")


class NonceStore:
    """File-backed record of the last nonce used ("saved RN")."""

    def __init__(self, path: Path):
        self.path = Path(path)

    def load(self) -> SessionNonce:
        """
        Return the recorded nonce.

        Raises:
            NoSavedNonce: If nothing has been recorded yet
            NonceFormatError: If the record is not 32 hex characters
        """
        try:
            text = self.path.read_text(encoding="utf-8").strip()
        except FileNotFoundError:
            raise NoSavedNonce(f"no saved nonce at {self.path}") from None
        except OSError as e:
            raise NoSavedNonce(f"cannot read saved nonce at {self.path}: {e}") from e
        if not text:
            raise NoSavedNonce(f"saved nonce file {self.path} is empty")
        return parse_nonce_hex(text)

    def save(self, rn: SessionNonce) -> None:
        self.path.write_text(rn.hex + "\n", encoding="utf-8")
        logger.debug(f"Recorded nonce to {self.path}")


def parse_nonce_hex(text: str) -> SessionNonce:
    text = text.strip()
    if len(text) != 2 * NONCE_SIZE:
        raise NonceFormatError(f"nonce must be {2 * NONCE_SIZE} hex characters, got {len(text)}")
    try:
        return SessionNonce(bytes.fromhex(text))
    except ValueError as e:
        raise NonceFormatError(f"nonce is not valid hex: {e}") from e


def new_nonce(mode: str = "system", provided: Optional[str] = None,
              store: Optional[NonceStore] = None) -> SessionNonce:
    """
    Produce the nonce for one message.

    Args:
        mode: "saved" (reuse the recorded nonce), "provided" (parse hex) or
            "system" (draw 16 bytes from the OS CSPRNG)
        provided: 32 hex characters, for "provided" mode
        store: Nonce record, for "saved" mode

    Raises:
        NonceFormatError: On bad hex
        NoSavedNonce: If "saved" mode finds no record
    """
    if mode == "system":
        return SessionNonce(secrets.token_bytes(NONCE_SIZE))
    if mode == "provided":
        if provided is None:
            raise NonceFormatError("provided nonce mode requires a hex value")
        return parse_nonce_hex(provided)
    if mode == "saved":
        if store is None:
            raise NoSavedNonce("no nonce store configured")
        return store.load()
    raise ValueError(f"unknown nonce mode: {mode!r}, expected one of {NONCE_MODES}")


def encode_frame(rn: SessionNonce, final: FinalCipher) -> bytes:
    """Serialize (rn, final cipher) to the frame layout, byte-for-byte deterministic."""
    count = len(final.values)
    check_cipher_length(count)
    return HEADER.pack(MAGIC, VERSION, rn.rn, count) + struct.pack(f">{count}d", *final.values)


def decode_frame(data: bytes) -> Tuple[SessionNonce, FinalCipher]:
    """
    Parse and validate a frame.

    Raises:
        WrongProtocol: On a bad magic
        UnsupportedVersion: On any version but 0x01
        MalformedFrame: On a truncated frame, trailing bytes or a bad count
        CorruptFrame: On a non-finite or non-positive value
    """
    data = bytes(data)
    if len(data) < len(MAGIC):
        raise MalformedFrame(f"frame truncated at {len(data)} bytes")
    if data[:4] != MAGIC:
        raise WrongProtocol(f"bad magic {data[:4]!r}")
    if len(data) < HEADER.size:
        raise MalformedFrame(f"frame header truncated at {len(data)} bytes")
    _, version, rn, count = HEADER.unpack_from(data)
    if version != VERSION:
        raise UnsupportedVersion(f"frame version {version:#04x} is not supported")
    if count % 2 == 0 or not MIN_CIPHER_LEN <= count <= MAX_CIPHER_LEN:
        raise MalformedFrame(f"cipher count must be odd and in [{MIN_CIPHER_LEN}, {MAX_CIPHER_LEN}], got {count}")
    expected = HEADER.size + 8 * count
    if len(data) != expected:
        raise MalformedFrame(f"frame is {len(data)} bytes, expected {expected}")

    values = struct.unpack_from(f">{count}d", data, HEADER.size)
    for i, v in enumerate(values):
        if not math.isfinite(v) or v <= 0.0:
            raise CorruptFrame(f"cipher value {i} is {v!r}")
    return SessionNonce(rn), FinalCipher(values)


async def write_frame(writer: asyncio.StreamWriter, frame: bytes) -> None:
    try:
        writer.write(LENGTH_PREFIX.pack(len(frame)) + frame)
        await writer.drain()
    except (ConnectionError, OSError) as e:
        raise TransportError(f"Failed to send frame: {e}") from e


async def read_frame(reader: asyncio.StreamReader) -> bytes:
    """Read one length-prefixed frame."""
    try:
        header = await reader.readexactly(LENGTH_PREFIX.size)
        (length,) = LENGTH_PREFIX.unpack(header)
        if length > MAX_FRAME_SIZE:
            raise MalformedFrame(f"announced frame of {length} bytes exceeds {MAX_FRAME_SIZE}")
        return await reader.readexactly(length)
    except asyncio.IncompleteReadError as e:
        raise TransportError(f"stream closed after {len(e.partial)} of {e.expected} bytes") from e
    except (ConnectionError, OSError) as e:
        raise TransportError(f"Failed to receive frame: {e}") from e


async def send_message(
    writer: asyncio.StreamWriter,
    plaintext: bytes,
    cred: Credentials,
    img: MemristorImage,
    rn: Optional[SessionNonce] = None,
) -> SessionNonce:
    """
    Encrypt plaintext and write it as one length-prefixed frame.

    A fresh system nonce is drawn unless one is supplied.

    Returns:
        The nonce used
    """
    rn = rn or new_nonce("system")
    final = encrypt_message(plaintext, cred, rn, img)
    frame = encode_frame(rn, final)
    await write_frame(writer, frame)
    logger.info(f"Sent frame of {len(frame)} bytes ({len(final)} cipher values)")
    return rn


async def receive_message(
    reader: asyncio.StreamReader,
    cred: Credentials,
    img: MemristorImage,
) -> bytes:
    """Read one frame and decrypt it with the frame's RN and the local credentials and image."""
    frame = await read_frame(reader)
    rn, final = decode_frame(frame)
    logger.info(f"Received frame of {len(frame)} bytes ({len(final)} cipher values)")
    return decrypt_message(final, cred, rn, img)
