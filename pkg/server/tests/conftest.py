import socket
import threading
import time

import pytest
import uvicorn

import tiny_models
from entgraph_server.app import create_app
from entgraph_server.config import ServerConfig


@pytest.fixture(scope="session")
def model_dirs(tmp_path_factory):
    root = tmp_path_factory.mktemp("models")
    return {
        "generator": tiny_models.save_tiny_t5(str(root / "t5")),
        "embedder": tiny_models.save_tiny_bert(str(root / "bert")),
        "scorer": tiny_models.save_tiny_scorer(str(root / "scorer")),
    }


@pytest.fixture(scope="session")
def server_config(model_dirs):
    return ServerConfig(generator_model=model_dirs["generator"],
                        embedder_model=model_dirs["embedder"],
                        scorer_model=model_dirs["scorer"])


def _free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture(scope="session")
def server_url(server_config):
    """The full app served by uvicorn in a background thread."""
    port = _free_port()
    app = create_app(server_config)
    config = uvicorn.Config(app, host="127.0.0.1", port=port,
                            log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 30
    while not server.started and time.time() < deadline:
        time.sleep(0.05)
    assert server.started, "server failed to start"
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)
