"""Command-line pipeline driver.

Each stage of graph construction is a subcommand reading and writing
plain files, so runs can be inspected and resumed stage by stage:

    entgraph generate --seeds seeds.txt --out preds.txt
    entgraph embed    --preds preds.txt --out emb.bin
    entgraph select   --embeddings emb.bin --out edges.tsv
    entgraph weigh    --edges edges.tsv --out weighted.tsv
    entgraph build    --weighted weighted.tsv --out graph.egg
    entgraph eval     --graphs dir/ --dataset pairs.tsv --report report.json

Exit codes: 0 success, 1 usage or configuration error, 2 data format
error, 3 backend failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import evalkit
from .backend import BackendError, BackendUnreachable, make_backend
from .config import ConfigError, load_config
from .generator import expand, read_predicate_file, write_predicate_file
from .graph import (EntailmentGraph, FormatError, GraphCollection)
from .pipeline import (default_head, embed_predicates, generation_config,
                       spheres_for, type_pair_for)
from .predicates import (MalformedPredicate, format_predicate, parse_predicate,
                         type_pair_of)
from .selector import (DegenerateData, SelectorTrainConfig, SphereHead,
                       load_embedding_cache, save_embedding_cache,
                       select_top_edges, train_head)
from .surface import UnsupportedShape, render_sentence
from .weigher import WeightedEdge, score_edges

log = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BACKEND = 0, 1, 2, 3


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _config(args):
    try:
        return load_config(getattr(args, "config", None),
                           getattr(args, "set", None) or ())
    except ConfigError as exc:
        raise _Fail(EXIT_USAGE, f"config error: {exc}")
    except OSError as exc:
        raise _Fail(EXIT_USAGE, f"cannot read config: {exc}")


def _backend(args, cfg):
    spec = getattr(args, "backend", None) or cfg.backend
    seed = args.seed if getattr(args, "seed", None) is not None else cfg.seed
    try:
        return make_backend(spec, seed=seed, d_v=cfg.d_v)
    except ValueError as exc:
        raise _Fail(EXIT_USAGE, str(exc))


def _read_preds(path):
    try:
        return read_predicate_file(path)
    except OSError as exc:
        raise _Fail(EXIT_USAGE, f"cannot read {path}: {exc}")
    except MalformedPredicate as exc:
        raise _Fail(EXIT_DATA, f"{path}: {exc}")


def _head_for(args, cfg):
    path = getattr(args, "head", None) or cfg.head_path
    if path:
        try:
            return SphereHead.load(path)
        except (OSError, ValueError) as exc:
            raise _Fail(EXIT_DATA, f"cannot load head checkpoint {path}: {exc}")
    return default_head(cfg)


# ---------------------------------------------------------------------------
# edge list files
# ---------------------------------------------------------------------------

def _write_edges(path, edges):
    with open(path, "w", encoding="utf-8") as fh:
        for p, q in edges:
            fh.write(f"{format_predicate(p)}\t{format_predicate(q)}\n")


def _read_edges(path):
    edges = []
    with open(path, encoding="utf-8") as fh:
        for no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise _Fail(EXIT_DATA, f"{path} line {no}: expected 2 fields")
            try:
                edges.append((parse_predicate(parts[0]),
                              parse_predicate(parts[1])))
            except MalformedPredicate as exc:
                raise _Fail(EXIT_DATA, f"{path} line {no}: {exc}")
    return edges


def _write_weighted(path, weighted):
    with open(path, "w", encoding="utf-8") as fh:
        for e in weighted:
            fh.write(f"{format_predicate(e.src)}\t{format_predicate(e.dst)}"
                     f"\t{repr(float(e.weight))}\n")


def _read_weighted(path):
    edges = []
    with open(path, encoding="utf-8") as fh:
        for no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise _Fail(EXIT_DATA, f"{path} line {no}: expected 3 fields")
            try:
                edges.append(WeightedEdge(parse_predicate(parts[0]),
                                          parse_predicate(parts[1]),
                                          float(parts[2])))
            except (MalformedPredicate, ValueError) as exc:
                raise _Fail(EXIT_DATA, f"{path} line {no}: {exc}")
    return edges


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_generate(args):
    cfg = _config(args)
    seeds = _read_preds(args.seeds)
    if not seeds:
        raise _Fail(EXIT_DATA, f"{args.seeds}: no seed predicates")
    backend = _backend(args, cfg)
    try:
        result = expand(set(seeds), generation_config(cfg), backend)
    except BackendUnreachable as exc:
        raise _Fail(EXIT_BACKEND, str(exc))
    write_predicate_file(args.out, result.predicates)
    print(f"generated {len(result.predicates)} predicates "
          f"in {result.stages} stages -> {args.out}")
    if not result.complete:
        raise _Fail(EXIT_BACKEND, "backend became unreachable; partial output written")
    return EXIT_OK


def cmd_embed(args):
    cfg = _config(args)
    preds = _read_preds(args.preds)
    if not preds:
        raise _Fail(EXIT_DATA, f"{args.preds}: no predicates")
    backend = _backend(args, cfg)
    tp = type_pair_for(preds)
    try:
        cache = embed_predicates(preds, tp, backend, max_workers=args.workers)
    except BackendError as exc:
        raise _Fail(EXIT_BACKEND, str(exc))
    save_embedding_cache(args.out, cache)
    print(f"embedded {len(cache)} predicates -> {args.out}")
    return EXIT_OK


def cmd_select(args):
    cfg = _config(args)
    try:
        cache = load_embedding_cache(args.embeddings)
    except (OSError, ValueError) as exc:
        raise _Fail(EXIT_DATA, f"cannot load embeddings: {exc}")
    head = _head_for(args, cfg)
    spheres = spheres_for(cache, head)
    sphere_by_pred = {parse_predicate(k): s for k, s in spheres.items()}
    try:
        edges = select_top_edges(sphere_by_pred, cfg.k_edge)
    except ValueError as exc:
        raise _Fail(EXIT_DATA, str(exc))
    _write_edges(args.out, edges)
    print(f"selected {len(edges)} edges -> {args.out}")
    return EXIT_OK


def cmd_weigh(args):
    cfg = _config(args)
    edges = _read_edges(args.edges)
    if not edges:
        raise _Fail(EXIT_DATA, f"{args.edges}: no edges")
    preds = {p for e in edges for p in e}
    tp = type_pair_for(preds)
    backend = _backend(args, cfg)
    try:
        weighted, failures = score_edges(edges, tp, backend)
    except BackendUnreachable as exc:
        raise _Fail(EXIT_BACKEND, str(exc))
    _write_weighted(args.out, weighted)
    print(f"weighted {len(weighted)} edges "
          f"({len(failures)} failures) -> {args.out}")
    return EXIT_OK


def cmd_build(args):
    weighted = _read_weighted(args.weighted)
    preds = set(_read_preds(args.preds)) if args.preds else \
        {p for e in weighted for p in (e.src, e.dst)}
    if not preds:
        raise _Fail(EXIT_DATA, "no predicates to build a graph from")
    tp = type_pair_for(preds)
    try:
        graph = EntailmentGraph.build(tp, preds, weighted)
    except ValueError as exc:
        raise _Fail(EXIT_DATA, str(exc))
    graph.save(args.out)
    print(f"built graph: {len(graph)} predicates, "
          f"{len(graph.edges)} edges -> {args.out}")
    return EXIT_OK


def _load_graphs(path):
    collection = GraphCollection()
    if os.path.isdir(path):
        names = sorted(n for n in os.listdir(path) if n.endswith(".egg"))
        if not names:
            raise _Fail(EXIT_DATA, f"{path}: no .egg files")
        paths = [os.path.join(path, n) for n in names]
    else:
        paths = [path]
    for p in paths:
        try:
            collection.add(EntailmentGraph.load(p))
        except (OSError, FormatError, ValueError) as exc:
            raise _Fail(EXIT_DATA, f"{p}: {exc}")
    return collection


def cmd_eval(args):
    cfg = _config(args)
    collection = _load_graphs(args.graphs)
    try:
        pairs = evalkit.load_dataset(args.dataset)
    except OSError as exc:
        raise _Fail(EXIT_USAGE, f"cannot read dataset: {exc}")
    except FormatError as exc:
        raise _Fail(EXIT_DATA, f"{args.dataset}: {exc}")
    if not pairs:
        raise _Fail(EXIT_DATA, f"{args.dataset}: empty dataset")
    strategies = evalkit.ScoreStrategies(cfg.relaxed_match, cfg.lemma_backup,
                                         cfg.average_backup)
    try:
        report, _ = evalkit.evaluate(collection, pairs, strategies,
                                     precision_floor=args.precision_floor)
    except evalkit.DegenerateLabels as exc:
        raise _Fail(EXIT_DATA, str(exc))
    counts = evalkit.dataset_counts(pairs)
    report["splits"] = counts
    evalkit.write_report(args.report, report)
    print(f"evaluated {counts['total']} pairs "
          f"(AUC-PR {report['auc_pr']:.4f}, AUC-ROC {report['auc_roc']:.4f}) "
          f"-> {args.report}")
    return EXIT_OK


def cmd_train_selector(args):
    cfg = _config(args)
    try:
        cache = load_embedding_cache(args.embeddings)
    except (OSError, ValueError) as exc:
        raise _Fail(EXIT_DATA, f"cannot load embeddings: {exc}")
    try:
        dataset = evalkit.load_dataset(args.pairs)
    except FormatError as exc:
        raise _Fail(EXIT_DATA, f"{args.pairs}: {exc}")

    def vec(p):
        return cache.get(format_predicate(p))

    train_pairs, val_pairs = [], []
    for pair in dataset:
        vp, vq = vec(pair.premise), vec(pair.hypothesis)
        if vp is None or vq is None:
            log.warning("skipping pair without cached embeddings")
            continue
        (val_pairs if pair.split == "valid" else train_pairs).append(
            (vp, vq, pair.label))
    if not train_pairs:
        raise _Fail(EXIT_DATA, "no usable training pairs")
    tcfg = SelectorTrainConfig(learning_rate=cfg.learning_rate,
                               positive_repetition=cfg.positive_repetition,
                               seed=cfg.seed)
    try:
        head = train_head(train_pairs, tcfg,
                          head=default_head(cfg),
                          val_pairs=val_pairs or None)
    except DegenerateData as exc:
        raise _Fail(EXIT_DATA, str(exc))
    head.save(args.out)
    print(f"trained selector head on {len(train_pairs)} pairs -> {args.out}")
    return EXIT_OK


def cmd_audit(args):
    try:
        graph = EntailmentGraph.load(args.graph)
    except (OSError, FormatError) as exc:
        raise _Fail(EXIT_DATA, f"{args.graph}: {exc}")
    try:
        violations = graph.soft_transitivity_violations(args.epsilon)
    except ValueError as exc:
        raise _Fail(EXIT_USAGE, str(exc))
    print(f"soft transitivity at epsilon={args.epsilon}: "
          f"{len(violations)} violating 2-paths out of {len(graph.edges)} edges")
    for a, b, c in violations[:args.show]:
        print(f"  {format_predicate(a)} -> {format_predicate(b)} "
              f"-> {format_predicate(c)}")
    return EXIT_OK


def cmd_export_finetune(args):
    try:
        pairs = evalkit.load_dataset(args.dataset)
    except FormatError as exc:
        raise _Fail(EXIT_DATA, f"{args.dataset}: {exc}")
    try:
        count = evalkit.export_finetune_data(pairs, args.target, args.out)
    except ValueError as exc:
        raise _Fail(EXIT_USAGE, str(exc))
    print(f"wrote {count} {args.target} records -> {args.out}")
    return EXIT_OK


def cmd_mock_serve(args):
    """Serve the deterministic mock over the HTTP wire protocol, mainly
    for conformance-testing HTTP clients and servers."""
    from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

    from .backend import GenRequest, MockBackend, SchemaViolation

    mock = MockBackend(seed=args.seed, d_v=args.d_v)

    class Handler(BaseHTTPRequestHandler):
        def log_message(self, fmt, *a):
            log.debug(fmt, *a)

        def _reply(self, code, payload):
            body = json.dumps(payload).encode("utf-8")
            self.send_response(code)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            if self.path == "/healthz":
                self._reply(200, {"status": "ok"})
            else:
                self._reply(404, {"error": "not found"})

        def do_POST(self):
            length = int(self.headers.get("Content-Length", "0"))
            try:
                payload = json.loads(self.rfile.read(length) or b"{}")
            except json.JSONDecodeError:
                self._reply(400, {"error": "invalid JSON"})
                return
            try:
                if self.path == "/generate":
                    req = GenRequest(payload["prompt"], int(payload["beam"]),
                                     int(payload["num_return"]),
                                     int(payload.get("max_fill_tokens", 5)))
                    resp = mock.generate(req)
                    self._reply(200, {"sequences": list(resp.sequences)})
                elif self.path == "/embed":
                    resp = mock.embed(payload["sentence"])
                    self._reply(200, {"vector": resp.vector.tolist()})
                elif self.path == "/score":
                    resp = mock.score(payload["premise"], payload["hypothesis"])
                    self._reply(200, {"logits": list(resp.logits)})
                else:
                    self._reply(404, {"error": "not found"})
            except (KeyError, TypeError, ValueError, SchemaViolation) as exc:
                self._reply(400, {"error": str(exc)})

    server = ThreadingHTTPServer((args.host, args.port), Handler)
    print(f"mock backend listening on http://{args.host}:{server.server_port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(sp):
    sp.add_argument("--config", help="JSON configuration file")
    sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                    help="override a configuration key")
    sp.add_argument("--backend", help="'mock' or a model server URL")
    sp.add_argument("--seed", type=int, help="seed for the mock backend")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="entgraph",
        description="Typed entailment graph construction pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("generate", help="expand seed predicates")
    _add_common(sp)
    sp.add_argument("--seeds", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_generate)

    sp = sub.add_parser("embed", help="embed predicate sentences")
    _add_common(sp)
    sp.add_argument("--preds", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(fn=cmd_embed)

    sp = sub.add_parser("select", help="select candidate edges")
    _add_common(sp)
    sp.add_argument("--embeddings", required=True)
    sp.add_argument("--head", help="trained head checkpoint")
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_select)

    sp = sub.add_parser("weigh", help="weight selected edges")
    _add_common(sp)
    sp.add_argument("--edges", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_weigh)

    sp = sub.add_parser("build", help="assemble a graph file")
    sp.add_argument("--weighted", required=True)
    sp.add_argument("--preds", help="optional full predicate list")
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_build)

    sp = sub.add_parser("eval", help="evaluate graphs on a labeled dataset")
    _add_common(sp)
    sp.add_argument("--graphs", required=True,
                    help=".egg file or a directory of them")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--report", required=True)
    sp.add_argument("--precision-floor", type=float, default=None)
    sp.set_defaults(fn=cmd_eval)

    sp = sub.add_parser("train-selector", help="train the sphere head")
    _add_common(sp)
    sp.add_argument("--embeddings", required=True)
    sp.add_argument("--pairs", required=True, help="labeled pair TSV")
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_train_selector)

    sp = sub.add_parser("audit", help="check soft transitivity of a graph")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--show", type=int, default=10,
                    help="max violating paths to print")
    sp.set_defaults(fn=cmd_audit)

    sp = sub.add_parser("export-finetune", help="export fine-tuning data")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--target", required=True, choices=("generator", "weigher"))
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_export_finetune)

    sp = sub.add_parser("mock-serve", help="serve the mock backend over HTTP")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8787)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--d-v", type=int, default=768)
    sp.set_defaults(fn=cmd_mock_serve)

    return parser


def main(argv=None):
    logging.basicConfig(level=logging.WARNING)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (UnsupportedShape, MalformedPredicate, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BackendError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BACKEND


if __name__ == "__main__":
    sys.exit(main())
