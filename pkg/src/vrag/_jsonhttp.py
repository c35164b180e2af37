"""Small JSON-over-HTTP server base used by the mock provider server and the
query service.  Routes map (method, path) to a handler returning a JSON-able
object; handlers may raise JsonHttpError to control the status code.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable

Handler = Callable[[object], object]


class JsonHttpError(Exception):
    def __init__(self, status: int, message: str) -> None:
        super().__init__(message)
        self.status = status
        self.message = message


class JsonHttpServer:
    """Threaded HTTP server serving JSON endpoints."""

    def __init__(self, routes: dict[tuple[str, str], Handler], port: int = 0,
                 host: str = "127.0.0.1") -> None:
        self._routes = dict(routes)
        outer = self

        class _RequestHandler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, fmt: str, *args: object) -> None:
                pass

            def _dispatch(self, method: str) -> None:
                handler = outer._routes.get((method, self.path))
                if handler is None:
                    self._reply(404, {"error": f"no route for {method} {self.path}"})
                    return
                payload: object = None
                if method == "POST":
                    length = int(self.headers.get("Content-Length") or 0)
                    body = self.rfile.read(length) if length else b""
                    try:
                        payload = json.loads(body.decode("utf-8")) if body else None
                    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
                        self._reply(400, {"error": f"invalid JSON body: {exc}"})
                        return
                try:
                    result = handler(payload)
                except JsonHttpError as exc:
                    self._reply(exc.status, {"error": exc.message})
                except Exception as exc:  # handler bug: surface as 500
                    self._reply(500, {"error": f"{type(exc).__name__}: {exc}"})
                else:
                    self._reply(200, result)

            def _reply(self, status: int, obj: object) -> None:
                body = json.dumps(obj).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_GET(self) -> None:
                self._dispatch("GET")

            def do_POST(self) -> None:
                self._dispatch("POST")

        self._httpd = ThreadingHTTPServer((host, port), _RequestHandler)
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def url(self) -> str:
        return f"http://{self._httpd.server_address[0]}:{self.port}"

    def serve_blocking(self) -> None:
        """Serve on the calling thread until interrupted."""
        try:
            self._httpd.serve_forever()
        finally:
            self._httpd.server_close()

    def start(self) -> None:
        if self._thread is not None:
            raise RuntimeError("server already started")
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        if self._thread is None:
            return
        self._httpd.shutdown()
        self._thread.join()
        self._httpd.server_close()
        self._thread = None

    def __enter__(self) -> "JsonHttpServer":
        self.start()
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.stop()
