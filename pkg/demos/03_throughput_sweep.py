# Simulated throughput n / mean(CRI) against the splitting factor d.
#
# Pass a run count on the command line (the default keeps this quick; the
# reference numbers use 10000 runs of n = 1000 users).

import sys

from sicta import ExperimentConfig, fair, sweep

runs = int(sys.argv[1]) if len(sys.argv) > 1 else 500
base = ExperimentConfig(n=1000, policy=fair(2), runs=runs, master_seed=42)

fair_rows = {r.d: r for r in sweep(range(2, 11), ["fair"], base)}
biased_rows = {r.d: r for r in sweep(range(2, 6), ["biased"], base)}

print(" d   ln(d)/(d-1)   fair            biased")
for d, r in fair_rows.items():
    b = biased_rows.get(d)
    biased_txt = f"{b.throughput:.4f} ±{b.ci95:.4f}" if b else ""
    print(f"{d:2d}   {r.yg_closed_form:.4f}        {r.throughput:.4f} ±{r.ci95:.4f}  {biased_txt}")
