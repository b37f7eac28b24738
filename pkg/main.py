"""
Main entry point for the keyless tool.

Exit codes:
    0   success
    1   unexpected error or I/O failure
    2   usage / configuration error
    3   InvalidCredential
    4   EmptyPlaintext
    5   MessageTooLong
    6   CorruptCipher (tampering, wrong password/ID, wrong RN or wrong LUT)
    7   MalformedCipher / MalformedFrame
    8   WrongProtocol
    9   UnsupportedVersion
    10  CorruptFrame
    11  TransportError
    12  ImageFormatError
    13  ImageValueError
    14  ImageIoError
    15  NonceFormatError
    16  NoSavedNonce
    17  other cipher errors
"""
import asyncio
import logging
import sys

from src.cli import cmd_decrypt, cmd_encrypt, cmd_kat, cmd_lutgen, cmd_recv, cmd_send, cmd_trace
from src.config import get_settings, log_level, parse_arguments, setup_logging
from src.errors import KeylessError


async def main(argv=None) -> int:
    """Run one command and return its exit status."""
    args = parse_arguments(argv)

    setup_logging(logging.DEBUG if args.verbose else logging.INFO)
    logger = logging.getLogger(__name__)

    try:
        settings = get_settings(args.env_file)
        logging.getLogger().setLevel(log_level(args, settings))

        if args.command == "lutgen":
            return cmd_lutgen(args.seed, args.out)
        if args.command == "kat":
            return cmd_kat(args.out)
        if args.command == "encrypt":
            return cmd_encrypt(args, settings)
        if args.command == "decrypt":
            return cmd_decrypt(args, settings)
        if args.command == "send":
            return await cmd_send(args, settings)
        if args.command == "recv":
            return await cmd_recv(args, settings)
        if args.command == "trace":
            return cmd_trace(args, settings)
        logger.error(f"Unknown command: {args.command}")
        return 2

    except KeylessError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        logger.error(f"Error running command: {e}")
        import traceback
        logger.error(traceback.format_exc())
        return 1


def run() -> None:
    sys.exit(asyncio.run(main()))


if __name__ == "__main__":
    run()
