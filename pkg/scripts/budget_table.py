"""Largest efficiently factorable N and trial counts over a range of per-step losses alpha."""
import argparse
import math

from shor_decoherence.budget import is_quantum_efficient, max_factorable


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--alphas", default="1e-2,1e-3,1e-4,1e-5,1e-6,1e-7")
    args = parser.parse_args()
    print(f"{'alpha':>8} {'ln N_max':>10} {'digits':>8} {'trials at L=lnN_max/2':>22} {'efficient':>10}")
    for alpha in (float(a) for a in args.alphas.split(",")):
        ln_n = max_factorable(alpha).ln_n_max
        # at L = ln N_max, L^2 alpha = 1 exactly; report half that length instead
        L = 0.5 * ln_n
        eff = is_quantum_efficient(L, alpha)
        print(f"{alpha:8.0e} {ln_n:10.2f} {ln_n / math.log(10):8.1f} {eff.quantum_trials:22.2f} {str(eff.efficient):>10}")


if __name__ == "__main__":
    main()
