"""GSR as a function of odometry translation noise, for both per-frame
noise models. Useful for seeing where the nearest-candidate trigger
breaks down."""

import argparse
import dataclasses

import numpy as np

from hannes_grasp.pipeline import run_batch
from hannes_grasp.scenarios import standard_batch


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-per-kind", type=int, default=10)
    ap.add_argument("--sigmas", default="0,0.001,0.002,0.005,0.01")
    args = ap.parse_args()

    base = standard_batch(args.n_per_kind, noisy=True)
    sigmas = [float(s) for s in args.sigmas.split(",")]
    print("sigma_m   " + "  ".join(f"{m:>6s}" for m in ("white", "walk")))
    for sigma in sigmas:
        row = []
        for model in ("white", "walk"):
            specs = [dataclasses.replace(s, vo=dataclasses.replace(
                s.vo, translation_sigma=sigma, noise_model=model)) for s in base]
            row.append(run_batch(specs).gsr)
        print(f"{sigma:<8.4f}  " + "  ".join(f"{g:6.3f}" for g in row))
    print(f"(n = {len(base)} episodes per cell, mean hidden scale "
          f"{np.mean([s.vo.hidden_scale for s in base]):.2f})")


if __name__ == "__main__":
    main()
