"""Channels that support signatures but give no QKD key.

Signatures only need the forger's error rate to beat the honest mismatch
rate, while a key needs error correction paid at f_EC times h(e). Sweeping
the X-basis optical error shows the gap.

    python demos/qds_vs_qkd.py
"""

import numpy as np

from qds.analysis import analyze
from qds.cli import classify
from qds.config import bundled_config_path, load_config

config = load_config(bundled_config_path())

print("Q_X     p_E     e_x^U   QKD key    class")
for qx in np.arange(0.0, 0.0551, 0.005):
    point = config.replace("channel", "optical_error_x", float(qx))
    r = analyze(point.channel, point.decoy, point.security, point.n_pulses, point.options, strict=False)
    print(f"{qx:.3f}  {r.p_e:.4f}  {r.e_x_upper:.4f}  {r.qkd_key_length:>9.0f}  {classify(r.feasible, r.qkd_key_length)}")
