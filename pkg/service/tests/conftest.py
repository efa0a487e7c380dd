from __future__ import annotations

import socket
import threading
import time
from pathlib import Path

import httpx
import pytest
import uvicorn
from fastapi.testclient import TestClient

from negkb_service.app import create_app
from negkb_service.config import ServiceConfig

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def config() -> ServiceConfig:
    return ServiceConfig()


@pytest.fixture(scope="session")
def client(config) -> TestClient:
    return TestClient(create_app(config))


@pytest.fixture(scope="session")
def live_server(config):
    """The sidecar on a real local port, for clients that need a URL."""
    probe = socket.socket()
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()

    server = uvicorn.Server(
        uvicorn.Config(create_app(config), host="127.0.0.1", port=port, log_level="warning")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{port}"
    deadline = time.time() + 20
    while time.time() < deadline:
        try:
            if httpx.get(f"{base}/health", timeout=1.0).status_code == 200:
                break
        except httpx.HTTPError:
            time.sleep(0.05)
    else:
        raise RuntimeError("sidecar did not come up")
    yield base
    server.should_exit = True
    thread.join(timeout=5)
