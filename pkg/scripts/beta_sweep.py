"""Success rate of the full factoring pipeline against constant beta.

    python scripts/beta_sweep.py --N 15 --x 7 --trials 5000

Prints beta, success rate (+- one standard error), the uniform-c baseline
and the trial count the budget formula L/(1 - beta) would predict.
"""
import argparse
import math

import numpy as np

from shor_decoherence.instance import build_instance
from shor_decoherence.recovery import estimate_success_rate, uniform_baseline_rate
from shor_decoherence.sampler import SeededGenerator
from shor_decoherence.spectrum import ConstantBeta


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--N", type=int, default=15)
    parser.add_argument("--x", type=int, default=7)
    parser.add_argument("--trials", type=int, default=5000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--points", type=int, default=11)
    args = parser.parse_args()

    inst = build_instance(args.N, args.x)
    base = uniform_baseline_rate(inst)
    print(f"N={inst.N} x={inst.x} q={inst.q} r={inst.r}  uniform-c baseline {base:.4f}")
    print(f"{'beta':>6} {'rate':>8} {'stderr':>8} {'L/(1-beta)':>11}")
    for i, beta in enumerate(np.linspace(0, 1, args.points)):
        est = estimate_success_rate(inst, ConstantBeta(float(beta)), args.trials, SeededGenerator(args.seed, i))
        predicted = inst.L / (1 - beta) if beta < 1 else math.inf
        print(f"{beta:6.2f} {est.rate:8.4f} {est.stderr:8.4f} {predicted:11.2f}")


if __name__ == "__main__":
    main()
