from __future__ import annotations

import socket
import threading
import time

import pytest
import uvicorn

from embedsvc.app import create_app
from embedsvc.registry import Registry


def stub_registry() -> Registry:
    registry = Registry()
    registry.add_source("S48", "stub:48")
    registry.add_source("S64", "stub:64")
    return registry


class ServerHandle:
    def __init__(self, server: uvicorn.Server, thread: threading.Thread, port: int):
        self.server = server
        self.thread = thread
        self.url = f"http://127.0.0.1:{port}"

    def stop(self) -> None:
        self.server.should_exit = True
        self.thread.join(timeout=10)


def start_server(registry: Registry) -> ServerHandle:
    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    config = uvicorn.Config(create_app(registry), log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, kwargs={"sockets": [sock]}, daemon=True)
    thread.start()
    deadline = time.monotonic() + 15
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("server did not start")
        time.sleep(0.02)
    return ServerHandle(server, thread, port)


@pytest.fixture
def live_server():
    handle = start_server(stub_registry())
    yield handle
    handle.stop()


def huggingface_reachable() -> bool:
    try:
        socket.getaddrinfo("huggingface.co", 443)
        return True
    except OSError:
        return False
