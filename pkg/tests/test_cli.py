import json
import socket
import threading
import time

import pytest

import helpers
from entgraph.backend import HTTPBackend, GenRequest, MockBackend
from entgraph.cli import main
from entgraph.config import ConfigError, PipelineConfig, load_config
from entgraph.graph import EntailmentGraph
from entgraph.pipeline import end_to_end
from entgraph.predicates import format_predicate


SEED_TEXT = "".join(s + "\n" for s in helpers.SEED_STRINGS)


@pytest.fixture
def seeds_file(tmp_path):
    path = tmp_path / "seeds.txt"
    path.write_text(SEED_TEXT)
    return path


class TestConfig:
    def test_defaults_valid(self):
        cfg = PipelineConfig()
        assert cfg.validate() is cfg
        assert cfg.k_p == 5000 and cfg.k_edge == 20_000_000
        assert cfg.k_beam == cfg.k_sent == 50
        assert cfg.d_v == 768

    def test_load_json_and_overrides(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"k_p": 10, "f_plus": "square"}))
        cfg = load_config(path, ["seed=9", "relaxed_match=false"])
        assert cfg.k_p == 10 and cfg.f_plus == "square"
        assert cfg.seed == 9 and cfg.relaxed_match is False

    def test_unknown_f_plus_names_key(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"f_plus": "cubic"}))
        with pytest.raises(ConfigError, match="f_plus"):
            load_config(path)

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="k_q"):
            load_config(None, ["k_q=3"])

    def test_bad_int(self):
        with pytest.raises(ConfigError, match="k_p"):
            load_config(None, ["k_p=lots"])

    def test_nonpositive_count(self):
        with pytest.raises(ConfigError, match="k_nbr"):
            load_config(None, ["k_nbr=0"])


class TestPipelineSubcommands:
    def _run_chain(self, tmp_path, seeds_file, seed=7, k_edge=40):
        preds = tmp_path / "preds.txt"
        emb = tmp_path / "emb.bin"
        edges = tmp_path / "edges.tsv"
        weighted = tmp_path / "weighted.tsv"
        graph = tmp_path / "graph.egg"
        common = ["--backend", "mock", "--set", f"seed={seed}",
                  "--set", "k_p=12", "--set", f"k_edge={k_edge}"]
        assert main(["generate", "--seeds", str(seeds_file),
                     "--out", str(preds)] + common) == 0
        assert main(["embed", "--preds", str(preds),
                     "--out", str(emb)] + common) == 0
        assert main(["select", "--embeddings", str(emb),
                     "--out", str(edges)] + common) == 0
        assert main(["weigh", "--edges", str(edges),
                     "--out", str(weighted)] + common) == 0
        assert main(["build", "--weighted", str(weighted),
                     "--preds", str(preds), "--out", str(graph)]) == 0
        return preds, emb, edges, weighted, graph

    def test_generate_deterministic(self, tmp_path, seeds_file):
        outs = []
        for name in ("a.txt", "b.txt"):
            out = tmp_path / name
            assert main(["generate", "--seeds", str(seeds_file),
                         "--out", str(out), "--backend", "mock",
                         "--seed", "7", "--set", "k_p=12"]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_chain_matches_end_to_end(self, tmp_path, seeds_file):
        *_, graph_path = self._run_chain(tmp_path, seeds_file)
        chained = EntailmentGraph.load(graph_path)

        cfg = load_config(None, ["k_p=12", "k_edge=40", "seed=7"])
        graph, result, failures = end_to_end(helpers.seeds(), cfg,
                                             MockBackend(seed=7))
        assert failures == []
        assert chained == graph

    def test_selected_edge_count(self, tmp_path, seeds_file):
        preds, _, edges, _, _ = self._run_chain(tmp_path, seeds_file,
                                                k_edge=10 ** 6)
        n = len(preds.read_text().splitlines())
        assert len(edges.read_text().splitlines()) == n * (n - 1)

    def test_eval_and_audit(self, tmp_path, seeds_file):
        *_, graph_path = self._run_chain(tmp_path, seeds_file)
        dataset = tmp_path / "pairs.tsv"
        g = EntailmentGraph.load(graph_path)
        rows = []
        some = sorted(g.predicates, key=format_predicate)[:5]
        for i, p in enumerate(some):
            for j, q in enumerate(some):
                if p != q:
                    rows.append(f"{format_predicate(p)}\t{format_predicate(q)}"
                                f"\t{'True' if (i + j) % 2 else 'False'}\n")
        dataset.write_text("".join(rows))
        report_path = tmp_path / "report.json"
        assert main(["eval", "--graphs", str(graph_path),
                     "--dataset", str(dataset),
                     "--report", str(report_path)]) == 0
        report = json.loads(report_path.read_text())
        assert "auc_pr" in report and "auc_roc" in report
        assert report["splits"]["total"] == len(rows)

        assert main(["audit", "--graph", str(graph_path),
                     "--epsilon", "0.9"]) == 0

    def test_train_selector(self, tmp_path, seeds_file):
        preds, emb, *_ = self._run_chain(tmp_path, seeds_file)
        names = preds.read_text().splitlines()[:4]
        dataset = tmp_path / "train.tsv"
        rows = [f"{names[0]}\t{names[1]}\tTrue\n",
                f"{names[1]}\t{names[0]}\tFalse\n",
                f"{names[2]}\t{names[3]}\tTrue\n",
                f"{names[3]}\t{names[2]}\tFalse\n"]
        dataset.write_text("".join(rows))
        head_path = tmp_path / "head.bin"
        assert main(["train-selector", "--embeddings", str(emb),
                     "--pairs", str(dataset), "--out", str(head_path),
                     "--set", "d_v=768"]) == 0
        assert head_path.stat().st_size > 0

    def test_export_finetune(self, tmp_path):
        dataset = tmp_path / "pairs.tsv"
        dataset.write_text(
            "(adore.1,adore.2,person,government)\t"
            "(know.1,know.2,person,government)\tTrue\n")
        out = tmp_path / "records.jsonl"
        assert main(["export-finetune", "--dataset", str(dataset),
                     "--target", "generator", "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 2


class TestExitCodes:
    def test_config_error_is_one(self, tmp_path, seeds_file):
        code = main(["generate", "--seeds", str(seeds_file),
                     "--out", str(tmp_path / "o"), "--set", "f_plus=cubic"])
        assert code == 1

    def test_data_error_is_two(self, tmp_path):
        bad = tmp_path / "seeds.txt"
        bad.write_text("not a predicate\n")
        code = main(["generate", "--seeds", str(bad),
                     "--out", str(tmp_path / "o"), "--backend", "mock"])
        assert code == 2

    def test_backend_error_is_three(self, tmp_path, seeds_file):
        code = main(["generate", "--seeds", str(seeds_file),
                     "--out", str(tmp_path / "o"),
                     "--backend", "http://127.0.0.1:1"])
        assert code == 3

    def test_bad_graph_file_is_two(self, tmp_path):
        bad = tmp_path / "g.egg"
        bad.write_text("junk\n")
        assert main(["audit", "--graph", str(bad), "--epsilon", "0.5"]) == 2


class TestMockServe:
    def test_wire_protocol(self):
        # run the served mock and the in-process mock side by side
        import entgraph.cli as cli

        with socket.socket() as s:
            s.bind(("127.0.0.1", 0))
            port = s.getsockname()[1]
        thread = threading.Thread(
            target=main,
            args=(["mock-serve", "--host", "127.0.0.1", "--port", str(port),
                   "--seed", "5"],),
            daemon=True)
        thread.start()
        url = f"http://127.0.0.1:{port}"
        client = HTTPBackend(url, timeout=5.0)
        deadline = time.time() + 10
        while time.time() < deadline:
            try:
                client.session.get(url + "/healthz", timeout=1.0)
                break
            except Exception:
                time.sleep(0.05)

        local = MockBackend(seed=5)
        prompt = ("Person A adores Government B, which entails that "
                  "Person A <FILL> Government B.")
        req = GenRequest(prompt, 50, 50)
        assert client.generate(req) == local.generate(req)
        import numpy as np
        assert np.array_equal(client.embed("x").vector,
                              local.embed("x").vector)
        assert client.score("p", "h") == local.score("p", "h")
