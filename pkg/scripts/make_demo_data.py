#!/usr/bin/env python3
"""Generate a small synthetic corpus plus matching embeddings for CLI demos.

Writes into the output directory:
  dataset.dept / dataset.txt   the same corpus in both forms
  embeddings.depe              a seeded random vocab_size x dim matrix
  model_config.json            a toy encoder config matching the vocabulary

Token ids follow a Zipf-like draw so the corpus leaves a realistic chunk
of the vocabulary unused.
"""

import argparse
import json
from pathlib import Path

import numpy as np

from dep import EmbeddingMatrix, TokenizedDataset, formats


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("demo_data"))
    parser.add_argument("--vocab-size", type=int, default=512)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--sequences", type=int, default=200)
    parser.add_argument("--max-len", type=int, default=64)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    sequences = []
    for _ in range(args.sequences):
        length = int(rng.integers(1, args.max_len + 1))
        ids = rng.zipf(1.7, size=length) % args.vocab_size
        sequences.append(ids.tolist())
    dataset = TokenizedDataset(tuple(sequences), args.vocab_size)
    matrix = EmbeddingMatrix(
        (rng.standard_normal((args.vocab_size, args.dim)) * 0.02).astype(np.float32)
    )

    args.out.mkdir(parents=True, exist_ok=True)
    formats.write_dataset_binary(dataset, args.out / "dataset.dept")
    formats.write_dataset_text(dataset, args.out / "dataset.txt")
    formats.write_embeddings(matrix, args.out / "embeddings.depe")
    config = {
        "name": f"toy-{args.vocab_size}",
        "vocab_size": args.vocab_size,
        "d_model": args.dim,
        "num_layers": 2,
        "num_heads": 2,
        "max_positions": args.max_len,
        "type_vocab": 1,
    }
    (args.out / "model_config.json").write_text(json.dumps(config, indent=2) + "\n")

    used = len({t for seq in sequences for t in seq})
    print(f"wrote demo corpus to {args.out}/ "
          f"({dataset.total_tokens} tokens, {used}/{args.vocab_size} ids used)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
