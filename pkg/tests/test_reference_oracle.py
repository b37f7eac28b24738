import itertools
import random

import pytest

from reference_oracle import (
    PairedRecord,
    oracle_helper_index,
    oracle_reorder,
    oracle_restore,
    oracle_restore_with_hia,
)
from src.cipher_core import (
    apply_permutation,
    invert_permutation,
    stable_order_permutation,
    trace_encryption,
)


def _records(orders, payloads):
    return [PairedRecord(o, v) for o, v in zip(orders, payloads)]


def test_reorder_small_case():
    assert oracle_reorder(_records([3, 1, 2], ["a", "b", "c"])) == ["b", "c", "a"]


def test_reorder_keeps_equal_orders_in_place():
    assert oracle_reorder(_records([4, 4, 4], [1.0, 2.0, 3.0])) == [1.0, 2.0, 3.0]


def test_restore_inverts_reorder():
    orders = [9, 2, 9, 0, 2]
    payloads = [1.5, 2.5, 3.5, 4.5, 5.5]
    assert oracle_restore(oracle_reorder(_records(orders, payloads)), orders) == payloads


def _check_sequence(orders, payloads):
    p = stable_order_permutation(orders)
    final = apply_permutation(payloads, p)
    assert oracle_reorder(_records(orders, payloads)) == final
    assert oracle_helper_index(orders) == p.tolist()
    assert oracle_restore(final, orders) == apply_permutation(final, invert_permutation(p)) == payloads


def test_exhaustive_small_sequences():
    for n in range(1, 7):
        payloads = [float(100 + i) for i in range(n)]
        for orders in itertools.product(range(3), repeat=n):
            _check_sequence(list(orders), payloads)


def test_random_short_sequences():
    rng = random.Random(240)
    for _ in range(10_000):
        n = rng.randint(1, 24)
        orders = [rng.randrange(128) for _ in range(n)]
        payloads = [rng.uniform(100.0, 4000.0) for _ in range(n)]
        _check_sequence(orders, payloads)


def test_random_full_length_sequences():
    rng = random.Random(241)
    for _ in range(300):
        n = rng.randint(25, 240)
        orders = [rng.randrange(128) for _ in range(n)]
        payloads = [rng.uniform(100.0, 4000.0) for _ in range(n)]
        _check_sequence(orders, payloads)


def test_pipeline_matches_oracle_bitwise(cred, rn, image):
    t = trace_encryption(b"Keyless", cred, rn, image)
    oracle_final = oracle_reorder(_records(t.orders, t.transit.values))
    assert oracle_final == list(t.final.values)

    restored, hia = oracle_restore_with_hia(list(t.final.values), t.orders)
    assert len(hia) == 15
    assert sorted(hia) == list(range(15))
    assert hia == list(t.helper_index)
    assert restored == list(t.transit.values)


def test_reference_order_vector():
    orders = [121, 63, 32, 125, 90, 81, 38, 46, 3, 76, 108, 17, 33, 100, 36]
    transit = [937, 205, 492, 310, 544, 350, 870, 292, 295, 402, 1322, 912, 257, 175, 329]
    final = [295, 912, 492, 257, 329, 870, 292, 205, 402, 350, 544, 175, 1322, 937, 310]

    assert oracle_reorder(_records(orders, transit)) == final
    restored, hia = oracle_restore_with_hia(final, orders)
    assert hia == [8, 11, 2, 12, 14, 6, 7, 1, 9, 5, 4, 13, 10, 0, 3]
    assert restored == transit


@pytest.mark.slow
def test_random_sequences_full_scale():
    rng = random.Random(10_240)
    for _ in range(10_000):
        n = rng.randint(1, 240)
        orders = [rng.randrange(128) for _ in range(n)]
        payloads = [rng.uniform(100.0, 4000.0) for _ in range(n)]
        _check_sequence(orders, payloads)
