"""Security report for the bundled 50 km reference link.

Prints the estimated channel quantities, the chosen thresholds and the three
failure probabilities, then shows how the report changes as the link grows.

    python demos/reference_report.py
"""

from qds.analysis import analyze
from qds.config import bundled_config_path, load_config

config = load_config(bundled_config_path())
report = analyze(config.channel, config.decoy, config.security, config.n_pulses, config.options)

print(f"pulses sent           {report.n_pulses:.3g}")
print(f"signature length L    {report.L}")
print(f"mismatch bound e_x^U  {report.e_x_upper:.3%}")
print(f"forger error rate p_E {report.p_e:.3%}")
print(f"thresholds s_a, s_v   {report.s_a:.3%}, {report.s_v:.3%}")
print(f"min-entropy           {report.h_min:.4g} bits")
print(f"P(abort)  {report.p_abort:.3g}")
print(f"P(forge)  {report.p_forge:.3g}")
print(f"P(repud)  {report.p_repud:.3g}")

# Longer links lose single-photon counts, so the forger's error rate falls
# towards the honest mismatch bound and eventually the scheme stops working.
print("\ndistance_km  p_E      e_x^U    feasible")
for km in (0, 25, 50, 75, 100):
    point = config.replace("channel", "distance_km", float(km))
    r = analyze(point.channel, point.decoy, point.security, point.n_pulses, point.options, strict=False)
    print(f"{km:>11}  {r.p_e:.4f}  {r.e_x_upper:.4f}  {r.feasible}")
