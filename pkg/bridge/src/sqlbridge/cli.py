from __future__ import annotations

import argparse
import sys

from .config import BridgeConfig
from .server import serve


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sqlbridge",
        description="Serve a paraphrase provider or parser backend over stdin/stdout.",
    )
    parser.add_argument("--mode", choices=("paraphrase", "parser"), required=True)
    parser.add_argument(
        "--model",
        default=None,
        help="paraphrase: echo | rule-noise (default echo); parser: memorize",
    )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--max-sequence-length", type=int, default=128)
    args = parser.parse_args(argv)

    model = args.model or ("echo" if args.mode == "paraphrase" else "memorize")
    try:
        config = BridgeConfig(
            mode=args.mode,
            model=model,
            device=args.device,
            max_sequence_length=args.max_sequence_length,
            seed=args.seed,
        )
        serve(config)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    sys.exit(main())
