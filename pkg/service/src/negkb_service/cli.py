"""Service entry points: ``negkb-service serve`` and ``dump-caches``."""

from __future__ import annotations

import argparse
import sys

from .backends import build_backends
from .config import ServiceConfig
from .dump import DEFAULT_DEPTH, DEFAULT_TEMPLATE, dump_caches


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="negkb-service")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the inference sidecar")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8791)

    dump = sub.add_parser("dump-caches", help="write similarity and probe caches offline")
    dump.add_argument("--kb", required=True, help="assertion file (pipeline format)")
    dump.add_argument("--candidates", required=True, help="candidate dump JSONL from a run")
    dump.add_argument("--sim-out", required=True)
    dump.add_argument("--probe-out", required=True)
    dump.add_argument("--template", default=DEFAULT_TEMPLATE)
    dump.add_argument("--depth", type=int, default=DEFAULT_DEPTH)

    args = parser.parse_args(argv)
    config = ServiceConfig.from_env()

    if args.command == "serve":
        import uvicorn

        from .app import create_app

        uvicorn.run(create_app(config), host=args.host, port=args.port, log_level="info")
        return 0

    embedder, masker = build_backends(config)
    try:
        stats = dump_caches(
            args.kb, args.candidates, args.sim_out, args.probe_out,
            embedder, masker, args.template, args.depth,
        )
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        f"dumped {stats['pairs']} similarity pairs -> {args.sim_out}, "
        f"{stats['templates']} probe templates -> {args.probe_out} "
        f"(models {embedder.model_id} / {masker.model_id})"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
