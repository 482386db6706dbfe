"""Self-service public-key resolution from (id, R) plus the directory.

The defining consistency triple: a resolved key satisfies

    decode_rho(pk) == derive_public_seed((id, R), matrix) == rho_checked

The rho on the left comes from the stored record, the one on the right is
recomputed locally from the public matrix. A directory (or a server in
online mode) that substitutes a record is caught because it cannot make a
foreign pk embed the rho that the client derives itself.

A failed resolution is the value None, never an exception; malformed
files and transport failures raise, so callers can tell "no" from
"broken". Online queries use length-prefixed messages over TCP:

    request  = u32 len | verb u8 (1=matrix, 2=record) | id bytes (verb 2)
    response = u32 len | payload
        verb 1 payload: the directory file's header and matrix region
        verb 2 payload: found u8 | pk bytes when found
"""

from __future__ import annotations

import socket
import socketserver
import struct
import threading
from dataclasses import dataclass
from typing import Callable, Optional

from . import pk_directory
from .errors import DecodeError, TransportError
from .mldsa import decode_rho
from .seed_fabric import IdentityHandle, SeedMatrixPub, derive_public_seed

VERB_MATRIX = 1
VERB_RECORD = 2

OK = "ok"
NOT_FOUND = "not-found"
RHO_MISMATCH = "rho-mismatch"


@dataclass(frozen=True)
class ResolvedKey:
    id: str
    R: bytes
    pk: bytes
    rho_checked: bytes


def _check(id_: str, r_value: bytes, pk: bytes | None,
           matrix: SeedMatrixPub) -> tuple[str, Optional[ResolvedKey]]:
    if pk is None:
        return NOT_FOUND, None
    rho = derive_public_seed(IdentityHandle(id_, r_value), matrix)
    if decode_rho(pk) != rho:
        return RHO_MISMATCH, None
    return OK, ResolvedKey(id=id_, R=r_value, pk=pk, rho_checked=rho)


def resolve(id_: str, r_value: bytes, file: bytes) -> Optional[ResolvedKey]:
    """Whole-file resolution; None when the record is missing or rho differs."""
    matrix = pk_directory.extract_matrix(file)
    _, resolved = _check(id_, r_value, pk_directory.lookup(file, id_), matrix)
    return resolved


class FileResolver:
    """Resolver over a directory file with the matrix parsed once.

    Tracks a byte-fetch model mirroring what a remote reader would pull:
    header+matrix on first use, then one record per query.
    """

    def __init__(self, file_provider: Callable[[], bytes] | bytes):
        if isinstance(file_provider, (bytes, bytearray)):
            blob = bytes(file_provider)
            self._provider = lambda: blob
        else:
            self._provider = file_provider
        self._matrix: SeedMatrixPub | None = None
        self.bytes_fetched = 0
        self.objects_fetched = 0

    def _ensure_matrix(self) -> SeedMatrixPub:
        if self._matrix is None:
            file = self._provider()
            self._matrix = pk_directory.extract_matrix(file)
            self.bytes_fetched += pk_directory.decode_header(file).record_region_offset
            self.objects_fetched += 1
        return self._matrix

    def resolve_detail(self, id_: str, r_value: bytes) -> tuple[str, Optional[ResolvedKey]]:
        matrix = self._ensure_matrix()
        file = self._provider()
        pk = pk_directory.lookup(file, id_)
        if pk is not None:
            self.bytes_fetched += 2 + len(id_.encode()) + len(pk)
            self.objects_fetched += 1
        return _check(id_, r_value, pk, matrix)

    def resolve(self, id_: str, r_value: bytes) -> Optional[ResolvedKey]:
        return self.resolve_detail(id_, r_value)[1]


# -- online endpoint ----------------------------------------------------


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise TransportError("connection closed mid-message")
        buf += chunk
    return buf


def _send_msg(sock: socket.socket, payload: bytes) -> int:
    data = struct.pack(">I", len(payload)) + payload
    sock.sendall(data)
    return len(data)


def _recv_msg(sock: socket.socket) -> tuple[bytes, int]:
    header = _recv_exact(sock, 4)
    (length,) = struct.unpack(">I", header)
    return _recv_exact(sock, length), 4 + length


class _QueryHandler(socketserver.BaseRequestHandler):
    def handle(self):
        try:
            payload, _ = _recv_msg(self.request)
        except TransportError:
            return
        file = self.server.file_provider()
        if not payload:
            return
        verb = payload[0]
        if verb == VERB_MATRIX:
            end = pk_directory.decode_header(file).record_region_offset
            _send_msg(self.request, file[:end])
        elif verb == VERB_RECORD:
            id_ = payload[1:].decode("utf-8", errors="replace")
            pk = pk_directory.lookup(file, id_)
            if pk is None:
                _send_msg(self.request, b"\x00")
            else:
                _send_msg(self.request, b"\x01" + pk)


class PkQueryServer(socketserver.ThreadingTCPServer):
    """Serves matrix and per-id record queries for a live directory file."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, file_provider: Callable[[], bytes] | bytes,
                 host: str = "127.0.0.1", port: int = 0):
        if isinstance(file_provider, (bytes, bytearray)):
            blob = bytes(file_provider)
            file_provider = lambda: blob  # noqa: E731
        self.file_provider = file_provider
        super().__init__((host, port), _QueryHandler)
        self._thread: threading.Thread | None = None

    @property
    def endpoint(self) -> tuple[str, int]:
        return self.server_address[0], self.server_address[1]

    def start(self) -> "PkQueryServer":
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self.shutdown()
        self.server_close()


class OnlineResolver:
    """Per-record online resolution; the matrix is fetched once and cached."""

    def __init__(self, endpoint: tuple[str, int], timeout: float = 5.0):
        self._endpoint = endpoint
        self._timeout = timeout
        self._matrix: SeedMatrixPub | None = None
        self.bytes_sent = 0
        self.bytes_received = 0
        self.objects_fetched = 0

    @property
    def bytes_fetched(self) -> int:
        return self.bytes_sent + self.bytes_received

    def _roundtrip(self, payload: bytes) -> bytes:
        try:
            with socket.create_connection(self._endpoint, timeout=self._timeout) as sock:
                self.bytes_sent += _send_msg(sock, payload)
                response, n = _recv_msg(sock)
                self.bytes_received += n
                return response
        except OSError as exc:
            raise TransportError(f"query to {self._endpoint} failed: {exc}") from exc

    def _ensure_matrix(self) -> SeedMatrixPub:
        if self._matrix is None:
            blob = self._roundtrip(bytes([VERB_MATRIX]))
            header = pk_directory.decode_header(blob)
            if len(blob) != header.record_region_offset:
                raise DecodeError("matrix response truncated", offset=len(blob))
            self._matrix = pk_directory.extract_matrix(blob)
            self.objects_fetched += 1
        return self._matrix

    def fetch_record(self, id_: str) -> bytes | None:
        response = self._roundtrip(bytes([VERB_RECORD]) + id_.encode("utf-8"))
        if not response:
            raise TransportError("empty record response")
        if response[0] == 0:
            return None
        self.objects_fetched += 1
        return response[1:]

    def resolve_detail(self, id_: str, r_value: bytes) -> tuple[str, Optional[ResolvedKey]]:
        matrix = self._ensure_matrix()
        return _check(id_, r_value, self.fetch_record(id_), matrix)

    def resolve(self, id_: str, r_value: bytes) -> Optional[ResolvedKey]:
        return self.resolve_detail(id_, r_value)[1]


def resolve_online(id_: str, r_value: bytes,
                   endpoint: tuple[str, int]) -> Optional[ResolvedKey]:
    """One-shot online resolution against a query endpoint."""
    return OnlineResolver(endpoint).resolve(id_, r_value)
