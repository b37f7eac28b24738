import hashlib
import random

import pytest

from src.digest_schedule import (
    LONG_DIGEST_SIZE,
    MAX_SELECTORS,
    CellSelector,
    Credentials,
    SessionNonce,
    build_long_digest,
    extract_selectors,
    normalize_credential,
    pack_selector,
    rotl16,
    seed_digest,
    unpack_selector,
)
from src.errors import InvalidCredential, NonceFormatError, SelectorBudgetExceeded


def test_normalize_identity():
    assert normalize_credential(b"\xaa" * 32) == b"\xaa" * 32


def test_normalize_pads_with_zeros():
    assert normalize_credential(b"pw") == b"\x70\x77" + bytes(30)


def test_normalize_truncates():
    raw = bytes(range(40))
    assert normalize_credential(raw) == raw[:32]


@pytest.mark.parametrize("raw", [b"", b"x" * 1025])
def test_normalize_rejects(raw):
    with pytest.raises(InvalidCredential):
        normalize_credential(raw)


def test_credentials_repr_hides_material():
    cred = Credentials.from_raw("device-0001", "hunter2-password")
    assert "hunter2" not in repr(cred)
    assert "device-0001" not in repr(cred)


def test_nonce_length_enforced():
    with pytest.raises(NonceFormatError):
        SessionNonce(b"\x00" * 15)


def test_seed_digest_equal_id_pw_is_hash_of_zeros():
    cred = Credentials.from_raw(b"same-value", b"same-value")
    assert seed_digest(cred, SessionNonce(bytes(16))) == hashlib.sha256(bytes(48)).digest()


def test_seed_digest_depends_on_rn():
    cred = Credentials.from_raw("id", "pw")
    flipped = bytearray(16)
    flipped[15] ^= 0x01
    assert seed_digest(cred, SessionNonce(bytes(16))) != seed_digest(cred, SessionNonce(bytes(flipped)))


def test_seed_digest_is_symmetric_in_id_and_pw():
    rn = SessionNonce(bytes(range(16)))
    a = Credentials.from_raw("device-0001", "Keyless-PW")
    b = Credentials.from_raw("Keyless-PW", "device-0001")
    assert seed_digest(a, rn) == seed_digest(b, rn)


def test_seed_digest_layout():
    cred = Credentials.from_raw(b"\x0f" * 32, b"\xf0" * 32)
    rn = SessionNonce(b"\x01" * 16)
    assert seed_digest(cred, rn) == hashlib.sha256(b"\xff" * 32 + b"\x01" * 16).digest()


@pytest.mark.parametrize("value, k, expected", [
    (0x8001, 1, 0x0003),
    (0x1234, 4, 0x2341),
    (0xBEEF, 0, 0xBEEF),
    (0xBEEF, 16, 0xBEEF),
    (0x8000, 15, 0x4000),
])
def test_rotl16(value, k, expected):
    assert rotl16(value, k) == expected


def test_rotl16_matches_single_step_loop():
    for value in (0x0001, 0x1234, 0xF00D, 0xFFFF, 0x0000):
        v = value
        for i in range(16):
            assert rotl16(value, i) == v
            v = ((v << 1) | (v >> 15)) & 0xFFFF


def test_long_digest_length():
    assert len(build_long_digest(bytes(32))) == LONG_DIGEST_SIZE == 512


def test_long_digest_first_block_is_plain_hash():
    seed = hashlib.sha256(b"seed").digest()
    assert build_long_digest(seed)[:32] == hashlib.sha256(seed).digest()


def test_long_digest_block_inputs():
    seed = bytes([0x12, 0x34]) + bytes(range(30))
    lmd = build_long_digest(seed)
    for i in range(16):
        message = rotl16(0x1234, i).to_bytes(2, "big") + seed[2:]
        assert lmd[32 * i:32 * (i + 1)] == hashlib.sha256(message).digest()


def test_zero_head_gives_identical_blocks():
    lmd = build_long_digest(bytes(2) + b"\x99" * 30)
    blocks = {lmd[32 * i:32 * (i + 1)] for i in range(16)}
    assert len(blocks) == 1


def test_full_period_head_gives_distinct_blocks():
    lmd = build_long_digest(bytes([0x00, 0x01]) + b"\x42" * 30)
    blocks = {lmd[32 * i:32 * (i + 1)] for i in range(16)}
    assert len(blocks) == 16


def test_long_digest_deterministic():
    seed = hashlib.sha256(b"determinism").digest()
    assert build_long_digest(seed) == build_long_digest(seed)


def test_selectors_all_ones():
    selectors = extract_selectors(b"\xff" * 512, 240)
    assert len(selectors) == 240
    assert all(s == CellSelector(127, 7, 127) for s in selectors)


def test_selectors_all_zeros():
    assert all(s == CellSelector(0, 0, 0) for s in extract_selectors(bytes(512), 240))


def test_selector_bit_walk():
    lmd = b"\xff\xff" + bytes(510)
    assert extract_selectors(lmd, 1)[0] == CellSelector(address=127, current=7, order=126)


def test_selector_budget():
    assert MAX_SELECTORS == 240
    with pytest.raises(SelectorBudgetExceeded):
        extract_selectors(bytes(512), 241)


def test_selectors_are_prefix_stable():
    lmd = build_long_digest(hashlib.sha256(b"prefix").digest())
    full = extract_selectors(lmd, 240)
    for n in (1, 17, 100, 239):
        assert extract_selectors(lmd, n) == full[:n]


def test_trailing_bits_unused():
    lmd = bytearray(build_long_digest(hashlib.sha256(b"tail").digest()))
    before = extract_selectors(bytes(lmd), 240)
    lmd[-2] ^= 0xFF
    lmd[-1] ^= 0xFF
    assert extract_selectors(bytes(lmd), 240) == before


def test_pack_unpack_exhaustive():
    for block in range(1 << 17):
        assert pack_selector(unpack_selector(block)) == block


def test_selector_read_from_stream_position():
    rng = random.Random(17)
    for _ in range(200):
        block = rng.getrandbits(17)
        k = rng.randrange(240)
        stream = block << (4096 - 17 * (k + 1))
        lmd = stream.to_bytes(512, "big")
        assert extract_selectors(lmd, k + 1)[k] == unpack_selector(block)


def test_selector_field_ranges():
    with pytest.raises(ValueError):
        CellSelector(128, 0, 0)
    with pytest.raises(ValueError):
        CellSelector(0, 8, 0)
    with pytest.raises(ValueError):
        CellSelector(0, 0, -1)
