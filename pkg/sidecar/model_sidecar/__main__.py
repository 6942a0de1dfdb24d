"""Run the sidecar: python -m model_sidecar --backend toy --port 8011"""

import argparse

import uvicorn

from .app import create_app
from .backends import make_backend


def main():
    parser = argparse.ArgumentParser(prog="model_sidecar")
    parser.add_argument("--backend", choices=["toy", "hf"], default="toy")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8011)
    args = parser.parse_args()
    app = create_app(make_backend(args.backend))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")


if __name__ == "__main__":
    main()
