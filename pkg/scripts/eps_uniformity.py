"""Norms of the forcing k and the remainder e for a ladder of eps values."""
import argparse

from vlimit.error_term import build_error
from vlimit.pipeline import ExperimentConfig, build_expansion


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", default="0.1,0.05,0.025")
    args = ap.parse_args()
    exp = build_expansion(ExperimentConfig())
    print("eps,sup_k,sup_e,k_at_T,e_at_T,picard_iterations")
    for eps in (float(v) for v in args.eps.split(",")):
        err = build_error(exp, eps)
        k, e = err.k_norm(), err.e_norm()
        print(f"{eps},{k.max():.6e},{e.max():.6e},{k[-1]:.6e},{e[-1]:.6e},{len(err.picard_log)}")


if __name__ == "__main__":
    main()
