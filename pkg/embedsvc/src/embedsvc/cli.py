"""Service entry point: embedsvc --models name=source,... --host --port --device."""

from __future__ import annotations

import argparse
import logging

import uvicorn

from .app import create_app
from .registry import DEFAULT_MODELS, Registry, parse_model_specs


def build_registry(specs: list[tuple[str, str]], device: str) -> Registry:
    registry = Registry()
    for name, source in specs:
        registry.add_source(name, source, device=device)
    return registry


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="embedsvc", description=__doc__)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8601)
    parser.add_argument(
        "--models",
        default=",".join(f"{n}={s}" for n, s in DEFAULT_MODELS),
        help="comma-separated name=source pairs; source is a "
        "sentence-transformers id or stub:<dim>",
    )
    parser.add_argument("--device", default="cpu")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(levelname)s\t%(name)s\t%(message)s")
    registry = build_registry(parse_model_specs(args.models), device=args.device)
    uvicorn.run(create_app(registry), host=args.host, port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
