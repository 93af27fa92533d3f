#!/usr/bin/env python3
"""What-if grid: total parameter reduction per model config and usage ratio.

For each shipped model configuration, prints PR_all for a range of
vocabulary usage ratios (fraction of ids a hypothetical corpus uses).
Shows at a glance how the embedding share caps the achievable savings.
"""

import argparse
from pathlib import Path

from dep import count_params, pr_all, pr_emb
from dep.formats import read_model_config

USAGE_RATIOS = (0.01, 0.05, 0.10, 0.25, 0.50, 0.75, 1.00)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--configs", type=Path,
                        default=Path(__file__).resolve().parents[1] / "configs")
    args = parser.parse_args()

    paths = sorted(args.configs.glob("*.json"))
    if not paths:
        raise SystemExit(f"no config files in {args.configs}")

    header = f"{'config':<22}{'params':>10}{'poep':>8}" + "".join(
        f"{f'use {int(100 * r)}%':>10}" for r in USAGE_RATIOS
    )
    print(header)
    print("-" * len(header))
    for path in paths:
        config = read_model_config(path)
        params = count_params(config)
        cells = ""
        for ratio in USAGE_RATIOS:
            reduced = round(ratio * config.vocab_size)
            value = pr_all(pr_emb(config.vocab_size, reduced), params)
            cells += f"{100 * value:>9.1f}%"
        print(f"{config.name:<22}{params.n_total / 1e6:>9.1f}M{100 * params.poep:>7.1f}%{cells}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
