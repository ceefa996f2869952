import json
import threading
from contextlib import contextmanager
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from intentbench.dataset import CLASS_ORDER


@contextmanager
def json_server(handler):
    """Serve POST requests on localhost. ``handler(payload, headers)``
    returns ``(status, body)``; a dict body is sent as JSON."""
    calls = []

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            raw = self.rfile.read(int(self.headers.get("Content-Length", 0)))
            payload = json.loads(raw)
            calls.append((payload, dict(self.headers)))
            status, body = handler(payload, self.headers)
            data = json.dumps(body).encode() if isinstance(body, (dict, list)) else str(body).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, *args):
            pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}/", calls
    finally:
        server.shutdown()
        server.server_close()


def blobs(n_per_class=30, d=2, gap=6.0, spread=0.5, seed=0):
    """Well separated Gaussian blobs, one per class."""
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((3, d))
    centers = gap * centers / np.linalg.norm(centers, axis=1, keepdims=True)
    if d == 2:
        centers = gap * np.array([[1.0, 0.0], [-0.5, 0.866], [-0.5, -0.866]])
    X = np.vstack([c + spread * rng.standard_normal((n_per_class, d)) for c in centers])
    labels = [lab for lab in CLASS_ORDER for _ in range(n_per_class)]
    return X, labels


@pytest.fixture
def blob_data():
    return blobs()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
