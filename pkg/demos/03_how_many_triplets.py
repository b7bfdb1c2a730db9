"""How many triplet questions do you actually need?

Sweeps the triplet fraction r for a sigmoid scale at moderate noise and
shows how the recovered-scale MSE decays, next to the rule-of-thumb
budgets d*n*log2(n) and 2*d*n*log2(n).
"""

from triadscale import ScalingFunctionSpec, triplet_budget
from triadscale.simulate import SweepConfig, aggregate, run_sweep

N = 10
cfg = SweepConfig(
    spec=ScalingFunctionSpec(kind="sigmoid"),
    n=N,
    sigma_list=(0.1,),
    r_list=(0.2, 0.4, 0.6, 0.8, 1.0),
    engines=("tste", "mlds"),
    repetitions=5,
    restarts=5,
    seed=0,
)
mean_rows, std_rows = aggregate(run_sweep(cfg, jobs=4))

base, doubled = triplet_budget(N, 1)
print(f"suggested budgets for n={N}, d=1: {base} (or doubled: {doubled})")
print(f"full universe: C({N},3) = 120 questions at r=1")
print()
print(f"{'engine':>6} {'r':>5} {'questions':>9} {'MSE':>9} {'triplet err':>11}")
for engine, sigma, r, mse, err in mean_rows:
    print(f"{engine:>6} {r:5.1f} {round(r * 120):9d} {mse:9.5f} {err:11.4f}")
