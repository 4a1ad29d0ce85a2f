"""Run the standard clean and noisy batches plus a mug batch; print metrics
and write per-episode CSV and summary JSON under --out."""

import argparse
from pathlib import Path

from hannes_grasp import io
from hannes_grasp.pipeline import run_batch
from hannes_grasp.scenarios import mug_episode, standard_batch


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--n-per-kind", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--path", choices=("line", "arc"), default="line")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    batches = {
        "clean": standard_batch(args.n_per_kind, noisy=False, seed=args.seed, path=args.path),
        "noisy": standard_batch(args.n_per_kind, noisy=True, seed=args.seed, path=args.path),
        "mug": [mug_episode(args.seed + i, noisy=True, path=args.path) for i in range(args.n_per_kind)],
    }
    for name, specs in batches.items():
        report = run_batch(specs, jobs=args.jobs)
        out = Path(args.out) / name
        out.mkdir(parents=True, exist_ok=True)
        io.write_outcomes_csv(out / "episodes.csv", report.outcomes)
        io.write_summary_json(out / "summary.json", report)
        print(f"{name:6s} n={report.n:3d}  GSR {report.gsr:.3f}  "
              f"AGT {report.agt_mean:.2f} +- {report.agt_std:.2f} s")
        for label, row in report.per_object.items():
            print(f"    {label:9s} GSR {row['gsr']:.3f}  AGT {row['agt_mean']:.2f} s")


if __name__ == "__main__":
    main()
