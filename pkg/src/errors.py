"""
Exception hierarchy for the keyless protocol.

Every error carries a stable process exit code so that scripts driving the
CLI can tell a tampered frame apart from a transport failure.
"""


class KeylessError(Exception):
    """Base class for all protocol errors."""
    exit_code = 1


class ConfigError(KeylessError):
    """Missing or contradictory command configuration."""
    exit_code = 2


# Credentials and digest schedule

class CredentialError(KeylessError):
    exit_code = 3


class InvalidCredential(CredentialError):
    """Empty or oversized ID/PW material."""


class SelectorBudgetExceeded(KeylessError):
    """More selectors requested than the long digest can supply."""
    exit_code = 17


# Cipher

class CipherError(KeylessError):
    exit_code = 17


class EmptyPlaintext(CipherError):
    exit_code = 4


class MessageTooLong(CipherError):
    exit_code = 5


class CorruptCipher(CipherError):
    """Decoded values do not land on the nibble grid: tampering, wrong PW/ID, RN or LUT."""
    exit_code = 6


class MalformedCipher(CipherError):
    exit_code = 7


class NibbleRangeError(CipherError):
    pass


class SizeMismatch(CipherError):
    pass


class PermutationError(CipherError):
    pass


# Wire frames

class FrameError(KeylessError):
    exit_code = 7


class MalformedFrame(FrameError):
    pass


class WrongProtocol(FrameError):
    exit_code = 8


class UnsupportedVersion(FrameError):
    exit_code = 9


class CorruptFrame(FrameError):
    exit_code = 10


class TransportError(KeylessError):
    exit_code = 11


# Memristor image

class ImageError(KeylessError):
    exit_code = 12


class ImageFormatError(ImageError):
    pass


class ImageValueError(ImageError):
    exit_code = 13


class ImageIoError(ImageError):
    exit_code = 14


# Nonces

class NonceError(KeylessError):
    exit_code = 15


class NonceFormatError(NonceError):
    pass


class NoSavedNonce(NonceError):
    exit_code = 16
