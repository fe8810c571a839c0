"""Run the sidecar: python -m scorer_service [--config cfg.json] [--stub]"""

import argparse
from dataclasses import replace

import uvicorn

from .app import create_app
from .config import ServiceConfig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="scorer-service")
    parser.add_argument("--config", default=None, help="JSON config file")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument(
        "--stub", action="store_true",
        help="serve deterministic protocol stubs instead of real models",
    )
    parser.add_argument("--llm-url", default=None, help="OpenAI-compatible LLM base URL")
    args = parser.parse_args(argv)

    config = ServiceConfig.from_file(args.config) if args.config else ServiceConfig()
    if args.stub:
        config = replace(config, stub_models=True)
    if args.llm_url:
        config = replace(config, llm=replace(config.llm, base_url=args.llm_url))

    uvicorn.run(create_app(config), host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
