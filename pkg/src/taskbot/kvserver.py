"""Tiny key-value server speaking the common text protocol.

Supports exactly what the store client needs: GET, SET (with optional EX
seconds), DEL, and PING. Useful for tests and for running distributed
mode without installing a real server. Not a database: everything lives
in one process's memory.
"""

import socket
import socketserver
import threading
import time
from typing import Dict, Optional, Tuple


class _Handler(socketserver.BaseRequestHandler):
    def handle(self) -> None:
        buffer = b""
        while True:
            command = self._read_command(buffer)
            if command is None:
                return
            parts, buffer = command
            reply = self.server.execute(parts)  # type: ignore[attr-defined]
            try:
                self.request.sendall(reply)
            except OSError:
                return

    def _read_command(self, buffer: bytes) -> Optional[Tuple[list, bytes]]:
        # blocking parse of one array-of-bulk-strings command
        def read_line() -> Optional[bytes]:
            nonlocal buffer
            while b"\r\n" not in buffer:
                try:
                    chunk = self.request.recv(65536)
                except OSError:
                    return None
                if not chunk:
                    return None
                buffer += chunk
            line, buffer = buffer.split(b"\r\n", 1)
            return line

        def read_exact(n: int) -> Optional[bytes]:
            nonlocal buffer
            while len(buffer) < n + 2:
                try:
                    chunk = self.request.recv(65536)
                except OSError:
                    return None
                if not chunk:
                    return None
                buffer += chunk
            data, buffer = buffer[:n], buffer[n + 2 :]
            return data

        header = read_line()
        if header is None:
            return None
        if not header.startswith(b"*"):
            return None
        count = int(header[1:])
        parts = []
        for _ in range(count):
            size_line = read_line()
            if size_line is None or not size_line.startswith(b"$"):
                return None
            data = read_exact(int(size_line[1:]))
            if data is None:
                return None
            parts.append(data)
        return parts, buffer


class KvServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, host: str = "127.0.0.1", port: int = 0) -> None:
        super().__init__((host, port), _Handler)
        self._data: Dict[bytes, bytes] = {}
        self._expiry: Dict[bytes, float] = {}
        self._lock = threading.Lock()

    @property
    def address(self) -> str:
        host, port = self.server_address[:2]
        return "%s:%d" % (host, port)

    def _purge(self, key: bytes) -> None:
        deadline = self._expiry.get(key)
        if deadline is not None and time.monotonic() >= deadline:
            self._data.pop(key, None)
            self._expiry.pop(key, None)

    def execute(self, parts: list) -> bytes:
        if not parts:
            return b"-ERR empty command\r\n"
        name = parts[0].upper()
        with self._lock:
            if name == b"PING":
                return b"+PONG\r\n"
            if name == b"GET" and len(parts) == 2:
                self._purge(parts[1])
                value = self._data.get(parts[1])
                if value is None:
                    return b"$-1\r\n"
                return b"$%d\r\n%s\r\n" % (len(value), value)
            if name == b"SET" and len(parts) >= 3:
                key, value = parts[1], parts[2]
                self._data[key] = value
                self._expiry.pop(key, None)
                if len(parts) == 5 and parts[3].upper() == b"EX":
                    self._expiry[key] = time.monotonic() + int(parts[4])
                elif len(parts) != 3:
                    return b"-ERR syntax error\r\n"
                return b"+OK\r\n"
            if name == b"DEL" and len(parts) >= 2:
                removed = 0
                for key in parts[1:]:
                    self._purge(key)
                    if self._data.pop(key, None) is not None:
                        removed += 1
                    self._expiry.pop(key, None)
                return b":%d\r\n" % removed
        return b"-ERR unknown command %s\r\n" % name


def start_server(host: str = "127.0.0.1", port: int = 0) -> KvServer:
    """Start a server on a background thread; caller owns shutdown()."""
    server = KvServer(host, port)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server


def main() -> None:
    import argparse

    parser = argparse.ArgumentParser(description="In-memory key-value server")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=6400)
    args = parser.parse_args()
    server = KvServer(args.host, args.port)
    print("listening on %s" % server.address)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()


if __name__ == "__main__":
    main()
