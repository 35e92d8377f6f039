"""Do the finite-size bounds hold against the simulator's hidden truth?

Each trial runs a full key generation, estimates the vacuum and single-photon
counts, the phase error rate and the mismatch rate from the public statistics,
and compares the bounds with the tagged photon numbers.

    python demos/estimator_soundness.py
"""

from qds.channel import ChannelParams, DecoySettings
from qds.montecarlo import SoundnessConfig, run_soundness_check

config = SoundnessConfig(
    n_pulses=10**6,
    eps_pe=0.01,
    alpha1=0.001,
    channel=ChannelParams(distance_km=0),
    decoy=DecoySettings(basis_prob_x=0.5),
)
trials = 2000
tally = run_soundness_check(config, trials, rng_seed=3)
print(f"{trials} trials, {tally.get('aborted')} aborted")
for key in ("s_x0_holds", "s_x1_holds", "phi_x1_holds", "e_x_holds"):
    print(f"  {key:<13} {tally.get(key) / trials:.4f}")
