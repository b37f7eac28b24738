"""
Configuration handling for the keyless tool.
"""
import argparse
import logging
from pathlib import Path
from typing import Optional

from pydantic import Field, SecretStr, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from .errors import ConfigError

logger = logging.getLogger(__name__)

def setup_logging(level=logging.INFO):
    """Set up basic logging configuration."""
    logging.basicConfig(level=level, format='%(asctime)s - %(levelname)s - %(message)s')


class Settings(BaseSettings):
    """
    Endpoint defaults, read from KEYLESS_* environment variables or an env file.

    The password stored here is the "saved password": it is used whenever no
    password flag is given on the command line.
    """
    model_config = SettingsConfigDict(env_prefix="KEYLESS_", extra="ignore")

    device_id: str = "device-0"
    password: Optional[SecretStr] = None
    lut_path: Optional[Path] = None
    host: str = "127.0.0.1"
    port: int = Field(default=47100, ge=0, le=65535)
    nonce_file: Path = Path(".keyless_rn")
    log_level: str = "INFO"
    connect_timeout: float = 10.0


def get_settings(env_file: Optional[str] = None) -> Settings:
    """
    Load settings, optionally from a .env file.

    Args:
        env_file: Path to the .env file

    Returns:
        Settings instance

    Raises:
        ConfigError: If a KEYLESS_* value fails validation
    """
    if env_file and not Path(env_file).exists():
        logger.warning(f"Environment file {env_file} not found, using default settings")
        env_file = None
    elif env_file:
        logger.info(f"Loading keyless settings from {env_file}")
    try:
        return Settings(_env_file=env_file)
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(str(part) for part in err['loc'])}: {err['msg']}" for err in e.errors())
        raise ConfigError(f"invalid KEYLESS_* setting: {problems}") from e


def port_number(text: str) -> int:
    """argparse type for a TCP port, 0..65535."""
    try:
        port = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid port: {text!r}") from None
    if not 0 <= port <= 65535:
        raise argparse.ArgumentTypeError(f"port must be in 0..65535, got {port}")
    return port


def _add_credential_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lut", type=Path, default=None, help="Path to the memristor image (LUT) file")
    parser.add_argument("--id", type=str, default=None, help="Device ID (defaults to KEYLESS_DEVICE_ID)")

    pw = parser.add_mutually_exclusive_group()
    pw.add_argument("--pw", type=str, default=None, help="Password value")
    pw.add_argument("--pw-env", type=str, default=None, metavar="VAR",
                    help="Read the password from this environment variable")
    pw.add_argument("--pw-prompt", action="store_true", help="Prompt for the password")


def _add_nonce_flags(parser: argparse.ArgumentParser) -> None:
    rn = parser.add_mutually_exclusive_group()
    rn.add_argument("--rn", type=str, default=None, metavar="HEX", help="Use this 32-hex-digit nonce")
    rn.add_argument("--rn-system", action="store_true", help="Draw the nonce from the OS (default)")
    rn.add_argument("--rn-saved", action="store_true", help="Reuse the last recorded nonce")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="keyless",
        description="Keyless encryption over a shared memristor-image lookup table",
    )
    parser.add_argument("--env-file", type=str, default=None, help="Path to .env file with KEYLESS_* settings")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", "-v", action="store_true", help="Log debug detail")
    verbosity.add_argument("--quiet", "-q", action="store_true", help="Log warnings and errors only")

    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    lutgen = sub.add_parser("lutgen", help="Generate a deterministic memristor image")
    lutgen.add_argument("--seed", type=lambda s: int(s, 0), required=True, help="64-bit seed")
    lutgen.add_argument("--out", type=Path, required=True, help="Output LUT file")

    encrypt = sub.add_parser("encrypt", help="Encrypt a file into one frame")
    _add_credential_flags(encrypt)
    _add_nonce_flags(encrypt)
    encrypt.add_argument("--in", dest="in_path", type=Path, required=True, help="Plaintext file (1..119 bytes)")
    encrypt.add_argument("--out", type=Path, required=True, help="Frame output file")

    decrypt = sub.add_parser("decrypt", help="Decrypt a frame file")
    _add_credential_flags(decrypt)
    decrypt.add_argument("--in", dest="in_path", type=Path, required=True, help="Frame file")
    decrypt.add_argument("--out", type=Path, required=True, help="Recovered plaintext file")

    send = sub.add_parser("send", help="Encrypt and send one message over TCP")
    _add_credential_flags(send)
    _add_nonce_flags(send)
    send.add_argument("--in", dest="in_path", type=Path, required=True, help="Plaintext file (1..119 bytes)")
    send.add_argument("--host", type=str, default=None)
    send.add_argument("--port", type=port_number, default=None)

    recv = sub.add_parser("recv", help="Receive and decrypt one message over TCP")
    _add_credential_flags(recv)
    recv.add_argument("--host", type=str, default=None)
    recv.add_argument("--port", type=port_number, default=None)
    recv.add_argument("--out", type=Path, default=None, help="Also write the plaintext here")

    kat = sub.add_parser("kat", help="Write the known-answer vector file")
    kat.add_argument("--out", type=Path, required=True)

    trace = sub.add_parser("trace", help="Print every intermediate step of one encrypt/decrypt round")
    _add_credential_flags(trace)
    _add_nonce_flags(trace)
    trace.add_argument("--in", dest="in_path", type=Path, required=True, help="Plaintext file (1..119 bytes)")

    return parser


def parse_arguments(argv=None) -> argparse.Namespace:
    """Parse command line arguments."""
    return build_parser().parse_args(argv)


def log_level(args: argparse.Namespace, settings: Settings) -> int:
    if args.verbose:
        return logging.DEBUG
    if args.quiet:
        return logging.WARNING
    level = logging.getLevelName(settings.log_level.upper())
    return level if isinstance(level, int) else logging.INFO
