"""`socsim` entry point: load config, print the effective seed, run the server."""

from __future__ import annotations

import asyncio
import logging
import sys
from typing import Optional, Sequence

from .config import ConfigError, load_config
from .exercise import Exercise
from .server import SocServer


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config, catalog = load_config(argv)
    except ConfigError as exc:
        print("socsim: invalid configuration:", file=sys.stderr)
        for error in exc.errors:
            print(f"  - {error}", file=sys.stderr)
        return 2

    logging.basicConfig(level=logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    # Printing the seed makes any exercise re-runnable deterministically.
    print(f"socsim: seed {config.seed}")
    if config.generated_token:
        print(f"socsim: generated teacher token: {config.teacher_token}")
    print(f"socsim: listening on http://{config.bind_address}:{config.port}/ "
          f"(web UI at /, WebSocket at /ws)")

    server = SocServer(Exercise(config, catalog), config)
    try:
        asyncio.run(server.serve_forever())
    except KeyboardInterrupt:
        print("socsim: shutting down")
    return 0


if __name__ == "__main__":
    sys.exit(main())
