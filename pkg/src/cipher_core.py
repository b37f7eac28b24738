"""
Cipher core: plaintext nibbles, transit cipher, order permutation and inversion.

Encryption maps every 4-bit plaintext block Q through the resistance R read
from the memristor image, C' = R * (1 + K * Q), prepends a calibration
element R0 * 2.5, and reorders the result by the stable sort of the selector
order values. Decryption undoes the permutation and inverts the formula,
rounding back onto the nibble grid.
"""
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .digest_schedule import (
    MAX_SELECTORS,
    CellSelector,
    Credentials,
    SessionNonce,
    build_long_digest,
    extract_selectors,
    rotl16,
    seed_digest,
)
from .errors import (
    CorruptCipher,
    EmptyPlaintext,
    MalformedCipher,
    MessageTooLong,
    NibbleRangeError,
    PermutationError,
    SizeMismatch,
)
from .memristor_image import MemristorImage

logger = logging.getLogger(__name__)

MAX_PLAINTEXT = (MAX_SELECTORS - 1) // 2  # 119
MIN_CIPHER_LEN = 3
MAX_CIPHER_LEN = 2 * MAX_PLAINTEXT + 1
RESIDUAL_LIMIT = 0.25


@dataclass(frozen=True)
class CipherParams:
    k: float = 0.2
    calibration_factor: float = 1 + 7.5 * 0.2


DEFAULT_PARAMS = CipherParams()


@dataclass(frozen=True)
class TransitCipher:
    """Pre-permutation values; element 0 is the calibration element."""
    values: Tuple[float, ...]


@dataclass(frozen=True)
class FinalCipher:
    """The transit cipher reordered by the order permutation; the transmitted payload."""
    values: Tuple[float, ...]

    def __len__(self) -> int:
        return len(self.values)


def check_cipher_length(count: int) -> None:
    """Raise MalformedCipher unless count is odd and within 3..239."""
    if count % 2 == 0 or not MIN_CIPHER_LEN <= count <= MAX_CIPHER_LEN:
        raise MalformedCipher(f"cipher length must be odd and in [{MIN_CIPHER_LEN}, {MAX_CIPHER_LEN}], got {count}")


def to_nibbles(plaintext: bytes) -> List[int]:
    """
    Split plaintext into 4-bit blocks, high nibble first.

    Raises:
        EmptyPlaintext: If plaintext is empty
        MessageTooLong: If plaintext exceeds 119 bytes
    """
    if not plaintext:
        raise EmptyPlaintext("plaintext must contain at least one byte")
    if len(plaintext) > MAX_PLAINTEXT:
        raise MessageTooLong(f"plaintext of {len(plaintext)} bytes exceeds the {MAX_PLAINTEXT}-byte limit")
    nibbles = []
    for b in plaintext:
        nibbles.append(b >> 4)
        nibbles.append(b & 0x0F)
    return nibbles


def from_nibbles(nibbles: Sequence[int]) -> bytes:
    """
    Concatenate 4-bit blocks back into bytes.

    Raises:
        NibbleRangeError: On an odd count or a value outside [0, 15]
    """
    if len(nibbles) % 2:
        raise NibbleRangeError(f"nibble count must be even, got {len(nibbles)}")
    for q in nibbles:
        if not 0 <= q <= 15:
            raise NibbleRangeError(f"nibble out of range: {q}")
    return bytes((nibbles[i] << 4) | nibbles[i + 1] for i in range(0, len(nibbles), 2))


def encode_transit(
    nibbles: Sequence[int],
    resistances: Sequence[float],
    params: CipherParams = DEFAULT_PARAMS,
) -> TransitCipher:
    """
    Apply C' = R * (1 + K * Q) to every nibble.

    Args:
        nibbles: Plaintext blocks Q
        resistances: One resistance per nibble plus one for the calibration element
        params: Formula constants

    Returns:
        Transit cipher of length len(nibbles) + 1

    Raises:
        SizeMismatch: If resistances is not exactly one longer than nibbles
    """
    if len(resistances) != len(nibbles) + 1:
        raise SizeMismatch(f"{len(resistances)} resistances for {len(nibbles)} nibbles")
    r = np.asarray(resistances, dtype=np.float64)
    if not np.all(r > 0.0):
        raise ValueError("resistances must be strictly positive")
    q = np.asarray(nibbles, dtype=np.float64)

    values = np.empty_like(r)
    values[0] = r[0] * params.calibration_factor
    values[1:] = r[1:] * (1.0 + params.k * q)
    return TransitCipher(tuple(values.tolist()))


def stable_order_permutation(orders: Sequence[int]) -> np.ndarray:
    """Stable argsort of the order array; ties keep their original index order."""
    if len(orders) < 1:
        raise PermutationError("order array must not be empty")
    return np.argsort(np.asarray(orders, dtype=np.int64), kind="stable")


def _check_permutation(p: np.ndarray, size: int | None = None) -> np.ndarray:
    p = np.asarray(p)
    if p.ndim != 1 or (size is not None and p.shape[0] != size):
        raise PermutationError(f"permutation of length {p.shape} does not match {size} values")
    if p.size and (not np.issubdtype(p.dtype, np.integer)
                   or not np.array_equal(np.sort(p), np.arange(p.shape[0]))):
        raise PermutationError("not a permutation of 0..N-1")
    return p


def apply_permutation(values: Sequence, p: Sequence[int]) -> list:
    """out[i] = values[p[i]]"""
    p = _check_permutation(np.asarray(p), len(values))
    return [values[j] for j in p.tolist()]


def invert_permutation(p: Sequence[int]) -> np.ndarray:
    """Return q with q[p[i]] = i."""
    p = _check_permutation(np.asarray(p))
    q = np.empty_like(p)
    q[p] = np.arange(p.shape[0], dtype=p.dtype)
    return q


def round_half_away(x: np.ndarray) -> np.ndarray:
    """C roundf semantics: halves go away from zero."""
    return np.where(x >= 0.0, np.floor(x + 0.5), np.ceil(x - 0.5))


def recover_quotients(
    transit: TransitCipher,
    resistances: Sequence[float],
    params: CipherParams = DEFAULT_PARAMS,
) -> np.ndarray:
    """Pre-rounding Q = (C'/R - 1)/K for every element after the calibration one."""
    if len(resistances) != len(transit.values):
        raise SizeMismatch(f"{len(resistances)} resistances for {len(transit.values)} cipher values")
    c = np.asarray(transit.values[1:], dtype=np.float64)
    r = np.asarray(resistances[1:], dtype=np.float64)
    if not np.all(r > 0.0):
        raise ValueError("resistances must be strictly positive")
    return (c / r - 1.0) / params.k


def decode_transit(
    transit: TransitCipher,
    resistances: Sequence[float],
    params: CipherParams = DEFAULT_PARAMS,
) -> List[int]:
    """
    Invert the transit formula and round back to nibbles.

    The calibration element is skipped.

    Raises:
        SizeMismatch: If the resistance count differs from the cipher length
        CorruptCipher: If a value rounds outside [0, 15] or sits 0.25 or more off the grid
    """
    with np.errstate(over="ignore", invalid="ignore"):
        q_hat = recover_quotients(transit, resistances, params)
        nibbles = round_half_away(q_hat)
        residual = np.abs(q_hat - nibbles)
    bad = ~np.isfinite(q_hat) | (nibbles < 0) | (nibbles > 15) | (residual >= RESIDUAL_LIMIT)
    if np.any(bad):
        first = int(np.argmax(bad)) + 1
        raise CorruptCipher(
            f"{int(bad.sum())} of {bad.size} cipher values off the nibble grid (first at index {first})"
        )
    return [int(n) for n in nibbles]


def _schedule(cred: Credentials, rn: SessionNonce, img: MemristorImage, count: int) -> Tuple[List[CellSelector], np.ndarray]:
    selectors = extract_selectors(build_long_digest(seed_digest(cred, rn)), count)
    return selectors, img.read_cells(selectors)


def encrypt_message(
    plaintext: bytes,
    cred: Credentials,
    rn: SessionNonce,
    img: MemristorImage,
    params: CipherParams = DEFAULT_PARAMS,
) -> FinalCipher:
    """
    Encrypt plaintext into the permuted final cipher.

    Args:
        plaintext: 1..119 bytes
        cred: Shared ID and password
        rn: Per-message nonce
        img: Shared memristor image

    Returns:
        Final cipher of length 2 * len(plaintext) + 1
    """
    nibbles = to_nibbles(plaintext)
    selectors, resistances = _schedule(cred, rn, img, len(nibbles) + 1)
    transit = encode_transit(nibbles, resistances, params)
    p = stable_order_permutation([s.order for s in selectors])
    logger.debug(f"Encrypted {len(plaintext)} bytes into {len(transit.values)} cipher values")
    return FinalCipher(tuple(apply_permutation(transit.values, p)))


def decrypt_message(
    final: FinalCipher | Sequence[float],
    cred: Credentials,
    rn: SessionNonce,
    img: MemristorImage,
    params: CipherParams = DEFAULT_PARAMS,
) -> bytes:
    """
    Recover the plaintext from a final cipher.

    Raises:
        MalformedCipher: If the cipher length is even or outside 3..239
        CorruptCipher: If the values do not decode under these credentials, nonce and image
    """
    values = tuple(final.values if isinstance(final, FinalCipher) else final)
    check_cipher_length(len(values))
    selectors, resistances = _schedule(cred, rn, img, len(values))
    p = stable_order_permutation([s.order for s in selectors])
    transit = TransitCipher(tuple(apply_permutation(values, invert_permutation(p))))
    nibbles = decode_transit(transit, resistances, params)
    logger.debug(f"Decrypted {len(values)} cipher values")
    return from_nibbles(nibbles)


@dataclass(frozen=True)
class EncryptionTrace:
    """Every intermediate of one encrypt/decrypt round, for step-by-step inspection."""
    rotated_heads: Tuple[int, ...]
    plaintext: bytes
    nibbles: Tuple[int, ...]
    selectors: Tuple[CellSelector, ...]
    resistances: Tuple[float, ...]
    transit: TransitCipher
    orders: Tuple[int, ...]
    sorted_orders: Tuple[int, ...]
    final: FinalCipher
    helper_index: Tuple[int, ...]
    recovered_transit: TransitCipher
    recovered_nibbles: Tuple[int, ...]
    recovered_plaintext: bytes


def trace_encryption(
    plaintext: bytes,
    cred: Credentials,
    rn: SessionNonce,
    img: MemristorImage,
    params: CipherParams = DEFAULT_PARAMS,
) -> EncryptionTrace:
    """Run encryption and decryption once, keeping every intermediate value."""
    seed = seed_digest(cred, rn)
    head = int.from_bytes(seed[:2], "big")
    nibbles = to_nibbles(plaintext)
    selectors, resistances = _schedule(cred, rn, img, len(nibbles) + 1)
    transit = encode_transit(nibbles, resistances, params)
    orders = [s.order for s in selectors]
    p = stable_order_permutation(orders)
    final = FinalCipher(tuple(apply_permutation(transit.values, p)))

    recovered = TransitCipher(tuple(apply_permutation(final.values, invert_permutation(p))))
    recovered_nibbles = decode_transit(recovered, resistances, params)
    return EncryptionTrace(
        rotated_heads=tuple(rotl16(head, i) for i in range(16)),
        plaintext=plaintext,
        nibbles=tuple(nibbles),
        selectors=tuple(selectors),
        resistances=tuple(resistances.tolist()),
        transit=transit,
        orders=tuple(orders),
        sorted_orders=tuple(sorted(orders)),
        final=final,
        helper_index=tuple(p.tolist()),
        recovered_transit=recovered,
        recovered_nibbles=tuple(recovered_nibbles),
        recovered_plaintext=from_nibbles(recovered_nibbles),
    )

