"""
Command implementations for the keyless tool.

Commands raise KeylessError subclasses; main.py turns them into exit codes.
Credential bytes are never printed, written or logged.
"""
import argparse
import getpass
import logging
import os
import sys
from pathlib import Path

from .cipher_core import trace_encryption
from .config import Settings
from .digest_schedule import Credentials
from .endpoint import KeylessEndpoint
from .errors import ConfigError, ImageIoError
from .kat import write_kat
from .memristor_image import CELL_COUNT, generate_image, load_image_file, save_image
from .wire_protocol import NonceStore

logger = logging.getLogger(__name__)


def resolve_password(args: argparse.Namespace, settings: Settings) -> str:
    """
    Pick the password from, in order: --pw, --pw-env, --pw-prompt, the saved password.

    Raises:
        ConfigError: If no source yields a password
    """
    if args.pw is not None:
        return args.pw
    if args.pw_env:
        value = os.environ.get(args.pw_env)
        if not value:
            raise ConfigError(f"environment variable {args.pw_env} is not set")
        return value
    if args.pw_prompt:
        return getpass.getpass("Enter the password: ")
    if settings.password is not None:
        logger.info("Using saved password")
        return settings.password.get_secret_value()
    raise ConfigError("no password given: use --pw, --pw-env, --pw-prompt or KEYLESS_PASSWORD")


def build_endpoint(args: argparse.Namespace, settings: Settings) -> KeylessEndpoint:
    lut = args.lut or settings.lut_path
    if lut is None:
        raise ConfigError("no memristor image given: use --lut or KEYLESS_LUT_PATH")
    cred = Credentials.from_raw(args.id or settings.device_id, resolve_password(args, settings))
    return KeylessEndpoint(
        cred,
        load_image_file(lut),
        nonce_store=NonceStore(settings.nonce_file),
        connect_timeout=settings.connect_timeout,
    )


def nonce_mode(args: argparse.Namespace) -> tuple[str, str | None]:
    if args.rn is not None:
        return "provided", args.rn
    if args.rn_saved:
        return "saved", None
    return "system", None


def _read_input(path: Path) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def cmd_lutgen(seed64: int, out_path: Path) -> int:
    """Write generate_image(seed64) to out_path and report its range."""
    image = generate_image(seed64)
    try:
        with open(out_path, "wb") as f:
            save_image(image, f)
    except OSError as e:
        raise ImageIoError(f"Cannot write memristor image {out_path}: {e}") from e
    print(f"Wrote {CELL_COUNT} cells to {out_path}")
    print(f"Resistance range: {image.cells.min():.6f} .. {image.cells.max():.6f} ohm")
    return 0


def cmd_encrypt(args: argparse.Namespace, settings: Settings) -> int:
    endpoint = build_endpoint(args, settings)
    plaintext = _read_input(args.in_path)
    mode, provided = nonce_mode(args)
    rn = endpoint.nonce(mode, provided)
    frame = endpoint.encrypt(plaintext, rn)
    with open(args.out, "wb") as f:
        f.write(frame)
    print(f"RN: {rn.hex}")
    return 0


def cmd_decrypt(args: argparse.Namespace, settings: Settings) -> int:
    endpoint = build_endpoint(args, settings)
    plaintext = endpoint.decrypt(_read_input(args.in_path))
    with open(args.out, "wb") as f:
        f.write(plaintext)
    print(f"Recovered {len(plaintext)} bytes to {args.out}")
    return 0


async def cmd_send(args: argparse.Namespace, settings: Settings) -> int:
    endpoint = build_endpoint(args, settings)
    plaintext = _read_input(args.in_path)
    mode, provided = nonce_mode(args)
    rn = endpoint.nonce(mode, provided)
    host = args.host or settings.host
    port = args.port if args.port is not None else settings.port
    await endpoint.send(host, port, plaintext, rn)
    print(f"RN: {rn.hex}")
    return 0


async def cmd_recv(args: argparse.Namespace, settings: Settings) -> int:
    endpoint = build_endpoint(args, settings)
    host = args.host or settings.host
    port = args.port if args.port is not None else settings.port
    plaintext = await endpoint.receive(host, port)
    if args.out is not None:
        with open(args.out, "wb") as f:
            f.write(plaintext)
    sys.stdout.buffer.write(plaintext + b"\n")
    sys.stdout.flush()
    return 0


def cmd_kat(out_path: Path) -> int:
    with open(out_path, "wb") as f:
        size = write_kat(f)
    print(f"Wrote {size} bytes of known-answer vectors to {out_path}")
    return 0


def _row(values, fmt: str = "{:.0f}") -> str:
    return "[" + " ".join(fmt.format(v) for v in values) + " ]"


def cmd_trace(args: argparse.Namespace, settings: Settings) -> int:
    """Print each intermediate step of one round, in the order the protocol computes them."""
    endpoint = build_endpoint(args, settings)
    plaintext = _read_input(args.in_path)
    mode, provided = nonce_mode(args)
    rn = endpoint.nonce(mode, provided)
    t = trace_encryption(plaintext, endpoint.cred, rn, endpoint.image)

    print(f"RN: {rn.hex}")
    print("Hash inputs, first two bytes after each rotation:")
    for i, head in enumerate(t.rotated_heads):
        print(f"  {i:2d}: {head >> 8:08b} {head & 0xFF:08b}")
    print(f"The plain text in hex: {' '.join(f'{b:02X}' for b in t.plaintext)}")
    print(f"Decimal value of each 4-bit block: {' '.join(str(q) for q in t.nibbles)}")
    print(f"The transit cipher is: {_row(t.transit.values)}")
    print(f"The order of cipher before sorting: {_row(t.orders, '{}')}")
    print(f"The order of cipher after sorting: {_row(t.sorted_orders, '{}')}")
    print(f"The final cipher is: {_row(t.final.values)}")
    print("Start decrypting process")
    print(f"The helper index array after desort: {_row(t.helper_index, '{}')}")
    print(f"The transit cipher got from final cipher after sorting is: {_row(t.recovered_transit.values)}")
    print(" ".join(str(q) for q in t.recovered_nibbles))
    print(f"End decryption, the plain text received is: {t.recovered_plaintext!r}")
    return 0
