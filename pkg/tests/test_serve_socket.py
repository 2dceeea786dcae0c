"""The service over a real socket: uvicorn + requests, no test client."""

from __future__ import annotations

import socket
import threading
import time

import pytest
import requests
import uvicorn

from agrirag.service import create_app

DISEASE_QUERY = "ধানের ব্লাস্ট রোগের লক্ষণ কী?"


@pytest.fixture()
def live_server(indexed_config):
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    app = create_app(indexed_config)
    server = uvicorn.Server(uvicorn.Config(app, log_level="warning"))
    thread = threading.Thread(target=server.run, kwargs={"sockets": [sock]}, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("server did not start")
        time.sleep(0.01)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=10)


def test_full_round_trip_over_socket(live_server):
    assert requests.get(f"{live_server}/v1/health", timeout=5).json() == {"status": "ok"}

    resp = requests.post(f"{live_server}/v1/ask", json={"query": DISEASE_QUERY}, timeout=10)
    assert resp.status_code == 200
    assert resp.headers["content-type"].startswith("application/json")
    trace = resp.json()
    assert trace["status"] == "answered"
    # Bengali survives the wire codepoint-exact in both directions
    assert trace["query_bn"] == DISEASE_QUERY
    assert trace["answer_bn"]

    stats = requests.get(f"{live_server}/v1/stats", timeout=5).json()
    assert stats["queries_served"] == 1
    assert sum(stats["source_distribution"].values()) == len(trace["hits"])


def test_error_statuses_over_socket(live_server):
    bad_json = requests.post(
        f"{live_server}/v1/ask",
        data=b"{broken",
        headers={"content-type": "application/json"},
        timeout=5,
    )
    assert bad_json.status_code == 400
    empty = requests.post(f"{live_server}/v1/ask", json={"query": ""}, timeout=5)
    assert empty.status_code == 422
