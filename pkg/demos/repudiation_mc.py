"""A dishonest signer tries to make Bob accept and Charlie reject.

The signer plants mismatches in the halves she sends each recipient, at
rates e_B and e_C. Symmetrisation hides which half each recipient will check,
so Charlie's kept share of his planted mismatches is hypergeometric and the
attack almost never succeeds.

    python demos/repudiation_mc.py
"""

from qds.montecarlo import run_repudiation_scenario
from qds.security import AdversaryStrategy, repudiation_strategy_bounds

L, s_a, s_v, trials = 2000, 0.05, 0.10, 20_000

for e_b, e_c in [(0.0, 0.0), (0.075, 0.075), (0.05, 0.10), (0.0, 0.15)]:
    strategy = AdversaryStrategy("repudiating_alice", e_b=e_b, e_c=e_c)
    estimate, tally = run_repudiation_scenario(strategy, L, s_a, s_v, trials, rng_seed=1)
    bound = min(1.0, 2.0 ** repudiation_strategy_bounds(strategy, s_a, s_v, L))
    low, high = estimate.interval
    print(
        f"e_B={e_b:.3f} e_C={e_c:.3f}  repudiated {estimate.frequency:.4f} "
        f"[{low:.4f}, {high:.4f}]  bound {bound:.3g}  "
        f"Bob accepted {tally.get('bob_accepted') / trials:.3f}"
    )
