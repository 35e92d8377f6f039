"""Fewest pulses needed to bring every failure probability under a target.

The forging bound carries fixed smoothing and estimation terms set by the
security parameters, so targets below their sum are unreachable at any length.

    python demos/signature_length.py
"""

import dataclasses

from qds.analysis import required_signature_length
from qds.config import bundled_config_path, load_config
from qds.errors import InfeasibleError

config = load_config(bundled_config_path())

for target in (1e-2, 1e-3, 1e-4, 1e-5):
    params = dataclasses.replace(config.security, target_level=target)
    try:
        L, n_pulses, report = required_signature_length(config.channel, config.decoy, params, config.options)
    except InfeasibleError as exc:
        print(f"target {target:.0e}: unreachable ({exc})")
        continue
    worst = max(report.p_abort, report.p_forge, report.p_repud)
    print(f"target {target:.0e}: L = {L:>9}  pulses = {n_pulses:.3e}  worst bound = {worst:.2e}")
