"""Command-line entry points: serve the API or fine-tune the generator."""

import argparse
import logging
import sys

from .config import ConfigError, ServerConfig, load_config


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="entgraph-server")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the model server")
    serve.add_argument("--config", required=True,
                       help="JSON file with ServerConfig fields")

    ft = sub.add_parser("finetune-generator",
                        help="fine-tune the generation model")
    ft.add_argument("--data", required=True, help="exported jsonl records")
    ft.add_argument("--model", required=True, help="base model directory")
    ft.add_argument("--out", required=True, help="checkpoint output directory")
    ft.add_argument("--learning-rate", type=float, default=1e-3)
    ft.add_argument("--patience", type=int, default=10)
    ft.add_argument("--max-epochs", type=int, default=100)
    ft.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO)

    if args.command == "serve":
        try:
            cfg = load_config(args.config)
        except (ConfigError, OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        import uvicorn
        from .app import create_app
        uvicorn.run(create_app(cfg), host=cfg.host, port=cfg.port)
        return 0

    if args.command == "finetune-generator":
        from .finetune import EmptyDataset, finetune_generator
        try:
            history = finetune_generator(
                args.data, args.model, args.out,
                learning_rate=args.learning_rate, patience=args.patience,
                max_epochs=args.max_epochs, seed=args.seed)
        except (EmptyDataset, ValueError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"trained {len(history)} epochs, "
              f"best val loss {min(history):.4f}, checkpoint at {args.out}")
        return 0

    return 1


if __name__ == "__main__":
    sys.exit(main())
