import random

import pytest

from src.digest_schedule import Credentials, SessionNonce
from src.memristor_image import generate_image


@pytest.fixture
def image():
    return generate_image(0x5EED)


@pytest.fixture
def cred():
    return Credentials.from_raw("device-0001", "Keyless-PW")


@pytest.fixture
def rn():
    return SessionNonce(bytes(range(16)))


@pytest.fixture
def rng():
    return random.Random(20190501)
