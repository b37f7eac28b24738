"""
Long message digest schedule.

Both parties hash (ID xor PW) together with the per-message RN, rotate the
two leading digest bytes sixteen times and hash each variant, giving a
512-byte long digest. The long digest is then read as a bitstream of 17-bit
cell selectors (7-bit address, 3-bit current level, 7-bit order).
"""
import hashlib
from dataclasses import dataclass, field
from typing import List

from .errors import InvalidCredential, NonceFormatError, SelectorBudgetExceeded

CREDENTIAL_SIZE = 32
NONCE_SIZE = 16
DIGEST_SIZE = 32
ROUNDS = 16
LONG_DIGEST_SIZE = ROUNDS * DIGEST_SIZE

ADDRESS_BITS = 7
CURRENT_BITS = 3
ORDER_BITS = 7
SELECTOR_BITS = ADDRESS_BITS + CURRENT_BITS + ORDER_BITS
MAX_SELECTORS = LONG_DIGEST_SIZE * 8 // SELECTOR_BITS  # 240

MAX_RAW_CREDENTIAL = 1024


def normalize_credential(raw: bytes) -> bytes:
    """
    Fit raw ID or password material to exactly 32 bytes.

    Longer input is truncated, shorter input is right-padded with zeros.

    Raises:
        InvalidCredential: If the input is empty or longer than 1024 bytes
    """
    if not raw:
        raise InvalidCredential("credential material must not be empty")
    if len(raw) > MAX_RAW_CREDENTIAL:
        raise InvalidCredential(f"credential material exceeds {MAX_RAW_CREDENTIAL} bytes")
    return bytes(raw[:CREDENTIAL_SIZE]).ljust(CREDENTIAL_SIZE, b"\x00")


@dataclass(frozen=True)
class Credentials:
    """Normalized device ID and shared password. Never rendered by repr."""
    id: bytes = field(repr=False)
    pw: bytes = field(repr=False)

    def __post_init__(self):
        if len(self.id) != CREDENTIAL_SIZE or len(self.pw) != CREDENTIAL_SIZE:
            raise InvalidCredential("id and pw must each be exactly 32 bytes after normalization")

    @classmethod
    def from_raw(cls, device_id: bytes | str, password: bytes | str) -> "Credentials":
        """Build credentials from user input, encoding text as UTF-8."""
        if isinstance(device_id, str):
            device_id = device_id.encode("utf-8")
        if isinstance(password, str):
            password = password.encode("utf-8")
        return cls(normalize_credential(device_id), normalize_credential(password))

    def mixed(self) -> bytes:
        """Bytewise ID xor PW."""
        return bytes(a ^ b for a, b in zip(self.id, self.pw))


@dataclass(frozen=True)
class SessionNonce:
    """The per-message random number, sent in clear with every frame."""
    rn: bytes

    def __post_init__(self):
        if len(self.rn) != NONCE_SIZE:
            raise NonceFormatError(f"nonce must be exactly {NONCE_SIZE} bytes, got {len(self.rn)}")

    @property
    def hex(self) -> str:
        return self.rn.hex()


@dataclass(frozen=True, slots=True)
class CellSelector:
    address: int
    current: int
    order: int

    def __post_init__(self):
        if not 0 <= self.address < 1 << ADDRESS_BITS:
            raise ValueError(f"address out of range: {self.address}")
        if not 0 <= self.current < 1 << CURRENT_BITS:
            raise ValueError(f"current out of range: {self.current}")
        if not 0 <= self.order < 1 << ORDER_BITS:
            raise ValueError(f"order out of range: {self.order}")


def seed_digest(cred: Credentials, rn: SessionNonce) -> bytes:
    """SHA-256 of (ID xor PW) followed by RN."""
    return hashlib.sha256(cred.mixed() + rn.rn).digest()


def rotl16(value: int, k: int) -> int:
    """Rotate a 16-bit value left by k positions (k taken mod 16)."""
    value &= 0xFFFF
    k %= 16
    return ((value << k) | (value >> (16 - k))) & 0xFFFF


def build_long_digest(seed: bytes) -> bytes:
    """
    Expand a 32-byte seed digest into the 512-byte long digest.

    Pass i replaces the two leading seed bytes with their big-endian value
    rotated left by i, hashes the result, and appends the digest. Pass 0 hashes
    the seed unchanged.

    Args:
        seed: 32-byte seed digest

    Returns:
        The 512-byte long digest
    """
    if len(seed) != DIGEST_SIZE:
        raise ValueError(f"seed digest must be {DIGEST_SIZE} bytes, got {len(seed)}")

    head = int.from_bytes(seed[:2], "big")
    tail = seed[2:]
    blocks = []
    for i in range(ROUNDS):
        message = rotl16(head, i).to_bytes(2, "big") + tail
        blocks.append(hashlib.sha256(message).digest())
    return b"".join(blocks)


def pack_selector(sel: CellSelector) -> int:
    """Pack a selector back into its 17-bit block value."""
    return (sel.address << (CURRENT_BITS + ORDER_BITS)) | (sel.current << ORDER_BITS) | sel.order


def unpack_selector(block: int) -> CellSelector:
    return CellSelector(
        address=(block >> (CURRENT_BITS + ORDER_BITS)) & ((1 << ADDRESS_BITS) - 1),
        current=(block >> ORDER_BITS) & ((1 << CURRENT_BITS) - 1),
        order=block & ((1 << ORDER_BITS) - 1),
    )


def extract_selectors(lmd: bytes, count: int) -> List[CellSelector]:
    """
    Slice the long digest into its first `count` 17-bit selectors.

    The digest is read MSB-first; block k occupies bits [17k, 17k+17). The
    trailing 16 bits of the stream are never used.

    Raises:
        SelectorBudgetExceeded: If count is greater than 240
    """
    if len(lmd) != LONG_DIGEST_SIZE:
        raise ValueError(f"long digest must be {LONG_DIGEST_SIZE} bytes, got {len(lmd)}")
    if count > MAX_SELECTORS:
        raise SelectorBudgetExceeded(f"{count} selectors requested, at most {MAX_SELECTORS} available")
    if count < 1:
        raise ValueError("at least one selector must be requested")

    stream = int.from_bytes(lmd, "big")
    total_bits = LONG_DIGEST_SIZE * 8
    mask = (1 << SELECTOR_BITS) - 1
    return [
        unpack_selector((stream >> (total_bits - SELECTOR_BITS * (k + 1))) & mask)
        for k in range(count)
    ]


def derive_selectors(cred: Credentials, rn: SessionNonce, count: int) -> List[CellSelector]:
    """Run the full schedule: seed digest, long digest, selectors."""
    return extract_selectors(build_long_digest(seed_digest(cred, rn)), count)
