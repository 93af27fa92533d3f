#!/usr/bin/env python3
"""Drive the full CLI pipeline on the demo corpus and check the roundtrip.

Steps: analyze -> prune -> (stand-in fine-tune that perturbs the reduced
matrix) -> restore -> report. Verifies that restoring the *unperturbed*
reduced matrix reproduces the original file byte for byte, and that the
perturbed restore touches exactly the remapped rows.
"""

import argparse
import json
from pathlib import Path

import numpy as np

from dep import EmbeddingMatrix, formats
from dep.cli import main as dep_main


def run(*argv) -> None:
    code = dep_main([str(a) for a in argv])
    if code != 0:
        raise SystemExit(f"subcommand {argv[0]} failed with exit code {code}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data", type=Path, default=Path("demo_data"),
                        help="directory produced by make_demo_data.py")
    parser.add_argument("--workdir", type=Path, default=Path("demo_run"))
    args = parser.parse_args()

    dataset = args.data / "dataset.dept"
    embeddings = args.data / "embeddings.depe"
    config = args.data / "model_config.json"
    work = args.workdir

    run("analyze", "--dataset", dataset, "--out", work / "analysis", "--force")
    stats = json.loads((work / "analysis" / "stats.json").read_text())
    print(f"coverage {stats['coverage_ratio']:.4f}, "
          f"{stats['used_tokens']}/{stats['vocab_size']} ids used", end="")
    if stats["heaps_fit"]:
        fit = stats["heaps_fit"]
        print(f", growth fit k={fit['k']:.2f} beta={fit['beta']:.3f}")
    else:
        print()

    run("prune", "--dataset", dataset, "--embeddings", embeddings,
        "--ordering", "frequency_descending", "--out", work / "pruned", "--force")

    # Untouched reduced matrix: restore must reproduce the original file.
    run("restore", "--embeddings", embeddings,
        "--learned", work / "pruned" / "pruned_embeddings.depe",
        "--remap", work / "pruned" / "remap.json",
        "--out", work / "restored_identity", "--force")
    identical = (work / "restored_identity" / "restored_embeddings.depe").read_bytes() \
        == embeddings.read_bytes()
    print(f"identity restore byte-identical: {identical}")
    if not identical:
        raise SystemExit("roundtrip failed")

    # Stand-in fine-tune: shift every reduced row, then restore.
    learned = formats.read_embeddings(work / "pruned" / "pruned_embeddings.depe")
    tuned = EmbeddingMatrix(learned.data + np.float32(0.125))
    formats.write_embeddings(tuned, work / "tuned.depe")
    run("restore", "--embeddings", embeddings, "--learned", work / "tuned.depe",
        "--remap", work / "pruned" / "remap.json",
        "--out", work / "restored_tuned", "--force")
    restored = formats.read_embeddings(work / "restored_tuned" / "restored_embeddings.depe")
    original = formats.read_embeddings(embeddings)
    remap = formats.read_remap(work / "pruned" / "remap.json")
    changed = int(np.count_nonzero(
        np.any(restored.data != original.data, axis=1)
    ))
    print(f"perturbed restore changed {changed} rows "
          f"(remap maps {remap.reduced_size})")

    run("report", "--remap", work / "pruned" / "remap.json",
        "--model-config", config, "--out", work / "report", "--force")
    report = json.loads((work / "report" / "report.json").read_text())
    print(f"pr_emb {report['pr_emb_pct']}%, pr_all {report['pr_all_pct']}%, "
          f"{report['bytes_saved']} bytes saved")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
