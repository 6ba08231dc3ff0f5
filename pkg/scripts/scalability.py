"""Wall time and peak traced allocation of one fit for growing n = p.

    python3 scripts/scalability.py --sizes 50 100 200 400 --out results/scaling
"""
import argparse
import time
import tracemalloc
from pathlib import Path

from scbiglasso.covariance import estimate_cov_pair
from scbiglasso.io import write_table
from scbiglasso.simulate import SimSpec, simulate
from scbiglasso.solver import SolverConfig, fit


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200, 400])
    ap.add_argument("--beta", type=float, default=0.3)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--out", default="results/scaling")
    args = ap.parse_args()

    cfg = SolverConfig(beta1=args.beta, beta2=args.beta)
    fit(estimate_cov_pair(simulate(SimSpec(n=4, p=4)).data, "empirical"), cfg)  # JIT warm-up
    records = []
    for d in args.sizes:
        cov = estimate_cov_pair(simulate(SimSpec(n=d, p=d, seed=args.seed)).data, "empirical")
        tracemalloc.start()
        base, _ = tracemalloc.get_traced_memory()
        t0 = time.perf_counter()
        res = fit(cov, cfg)
        secs = time.perf_counter() - t0
        _, peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        entries = (peak - base) / 8
        records.append({"n": d, "p": d, "seconds": secs, "peak_entries": entries,
                        "budget_entries": 10 * 3 * d * d, "iterations": res.iterations_run,
                        "converged": res.converged})
        print(f"n=p={d:<4d} {secs:7.1f}s peak {entries:.3g} entries "
              f"({entries / (3 * d * d):.2f} x (n^2+p^2+np))")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_table(out / "scaling.csv", records)


if __name__ == "__main__":
    main()
