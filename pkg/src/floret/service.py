"""Transports for the session protocol: NDJSON over stdio and over HTTP.

Both speak the same messages; HTTP is a single endpoint taking the request
object as the POST body (the ``method`` field selects the operation), which a
browser can consume directly.
"""

from __future__ import annotations

import json
import sys
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .session import SessionManager
from .syntax import Signature


def serve_stdio(manager: SessionManager, stdin=None, stdout=None) -> None:
    """One JSON request per line in, one JSON response per line out."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as e:
            response = {"id": None, "error": {"code": "bad_json", "message": str(e)}}
        else:
            response = manager.handle(request)
        stdout.write(json.dumps(response) + "\n")
        stdout.flush()


def make_http_server(manager: SessionManager, host: str = "127.0.0.1",
                     port: int = 0) -> ThreadingHTTPServer:
    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):  # noqa: N802 (stdlib naming)
            length = int(self.headers.get("Content-Length") or 0)
            body = self.rfile.read(length)
            try:
                request = json.loads(body or b"{}")
                response = manager.handle(request)
            except json.JSONDecodeError as e:
                response = {"id": None, "error": {"code": "bad_json", "message": str(e)}}
            data = json.dumps(response).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(data)

        def do_OPTIONS(self):  # noqa: N802
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.end_headers()

        def log_message(self, fmt, *args):  # quiet by default
            pass

    return ThreadingHTTPServer((host, port), Handler)


def serve_http(sig: Signature, host: str = "127.0.0.1", port: int = 8787,
               snapshot_dir: str | None = None) -> None:
    manager = SessionManager(sig, snapshot_dir)
    server = make_http_server(manager, host, port)
    print(f"serving on http://{host}:{server.server_address[1]}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
