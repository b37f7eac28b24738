"""
Endpoint module that coordinates credentials, memristor image and nonce record.
"""
import asyncio
import logging
from typing import Optional

from .cipher_core import decrypt_message, encrypt_message
from .digest_schedule import Credentials, SessionNonce
from .errors import TransportError
from .memristor_image import MemristorImage
from .wire_protocol import (
    NonceStore,
    decode_frame,
    encode_frame,
    new_nonce,
    receive_message,
    send_message,
)

logger = logging.getLogger(__name__)


class KeylessEndpoint:
    """One side of the protocol: everything both parties share, plus the local nonce record."""

    def __init__(self, cred: Credentials, image: MemristorImage,
                 nonce_store: Optional[NonceStore] = None, connect_timeout: float = 10.0):
        """
        Initialize the endpoint.

        Args:
            cred: Shared ID and password
            image: Shared memristor image
            nonce_store: Where the last nonce used is recorded, for "saved" RN mode
            connect_timeout: Seconds to wait for a TCP connection
        """
        self.cred = cred
        self.image = image
        self.nonce_store = nonce_store
        self.connect_timeout = connect_timeout
        self.bound_port: Optional[int] = None
        logger.info(f"Keyless endpoint initialized with image {image.source or '<memory>'}")

    def nonce(self, mode: str = "system", provided: Optional[str] = None) -> SessionNonce:
        return new_nonce(mode, provided, self.nonce_store)

    def _record(self, rn: SessionNonce) -> None:
        if self.nonce_store is None:
            return
        try:
            self.nonce_store.save(rn)
        except OSError as e:
            logger.warning(f"Could not record nonce to {self.nonce_store.path}: {e}")

    def encrypt(self, plaintext: bytes, rn: Optional[SessionNonce] = None) -> bytes:
        """
        Encrypt plaintext into a frame (no length prefix).

        Args:
            plaintext: 1..119 bytes
            rn: Nonce to use; a system nonce is drawn when omitted

        Returns:
            Frame bytes
        """
        rn = rn or self.nonce("system")
        frame = encode_frame(rn, encrypt_message(plaintext, self.cred, rn, self.image))
        self._record(rn)
        logger.info(f"Encrypted {len(plaintext)} bytes into a {len(frame)}-byte frame")
        return frame

    def decrypt(self, frame: bytes) -> bytes:
        rn, final = decode_frame(frame)
        plaintext = decrypt_message(final, self.cred, rn, self.image)
        logger.info(f"Decrypted a {len(frame)}-byte frame into {len(plaintext)} bytes")
        return plaintext

    async def send(self, host: str, port: int, plaintext: bytes,
                   rn: Optional[SessionNonce] = None) -> SessionNonce:
        """
        Connect, send one message and close.

        Raises:
            TransportError: If the connection cannot be made or breaks
        """
        try:
            reader, writer = await asyncio.wait_for(
                asyncio.open_connection(host, port), timeout=self.connect_timeout)
        except (OSError, OverflowError, asyncio.TimeoutError) as e:
            raise TransportError(f"Cannot connect to {host}:{port}: {e}") from e

        try:
            rn = await send_message(writer, plaintext, self.cred, self.image, rn)
            self._record(rn)
            return rn
        finally:
            writer.close()
            try:
                await writer.wait_closed()
            except (ConnectionError, OSError):
                pass

    async def receive(self, host: str, port: int, ready: Optional[asyncio.Event] = None) -> bytes:
        """
        Listen, accept exactly one connection and return its decrypted message.

        Args:
            host: Interface to bind
            port: Port to bind; 0 picks a free port, reported through `bound_port`
            ready: Set once the server is listening
        """
        loop = asyncio.get_running_loop()
        result: asyncio.Future = loop.create_future()

        async def handle(reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
            try:
                plaintext = await receive_message(reader, self.cred, self.image)
                if not result.done():
                    result.set_result(plaintext)
            except Exception as e:
                if not result.done():
                    result.set_exception(e)
            finally:
                writer.close()

        try:
            server = await asyncio.start_server(handle, host, port)
        except (OSError, OverflowError) as e:
            raise TransportError(f"Cannot listen on {host}:{port}: {e}") from e

        async with server:
            self.bound_port = server.sockets[0].getsockname()[1]
            logger.info(f"Listening on {host}:{self.bound_port}")
            if ready is not None:
                ready.set()
            return await result
