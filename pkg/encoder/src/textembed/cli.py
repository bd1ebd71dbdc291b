"""Command line for the statement embedding exporter.

Usage:
    textembed --statements statements.tsv --model MODEL --out vectors.pemb
              [--max-length 128] [--batch-size 32]

Reads ``key-hex16<TAB>text`` lines, encodes each text with the named
pre-trained transformer, and writes the binary embedding file.  Exit
codes: 0 success, 2 usage, 3 missing input file, 4 bad statement file.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .encoders import TransformerEncoder
from .exporter import StatementFileError, export_embeddings


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="textembed",
        description="Export transformer sentence embeddings for a statement file.",
    )
    p.add_argument("--statements", required=True, help="key<TAB>text input file")
    p.add_argument("--model", required=True,
                   help="pre-trained encoder name or local directory")
    p.add_argument("--out", required=True, help="output embedding file")
    p.add_argument("--max-length", type=int, default=128,
                   help="token window; longer statements keep their prefix")
    p.add_argument("--batch-size", type=int, default=32)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args = build_parser().parse_args(argv)
    try:
        encoder = TransformerEncoder(args.model, max_length=args.max_length)
        result = export_embeddings(
            args.statements, encoder, args.out, batch_size=args.batch_size
        )
    except FileNotFoundError as exc:
        print(f"error\tmissing-file\t{exc}", file=sys.stderr)
        return 3
    except StatementFileError as exc:
        print(f"error\tstatement-file\t{exc}", file=sys.stderr)
        return 4
    print(f"wrote {result.count} vectors of dim {result.dim} to {args.out}"
          + (f" ({result.truncated} truncated)" if result.truncated else ""))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
