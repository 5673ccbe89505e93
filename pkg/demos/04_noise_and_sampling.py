"""Noise amplification and the noise-free sampling inequality.

Run: python3 demos/04_noise_and_sampling.py
"""
from specweak import ExperimentConfig, run_noise_amplification, run_sampling_probe

rep = run_noise_amplification(ExperimentConfig(trials=500))
for r in rep.data["rows"]:
    print(f"nu={r['nu']:.2f}: E||g_hat_noisy - g_hat|| ~ {r['estimate']:.5f}, bound {r['bound']:.4f}")

probe = run_sampling_probe(ExperimentConfig(problem={"operator": "integration", "source_pair": "cosine"},
                                            nu=0.0))
for r in probe.data["rows"]:
    print(f"h={r['h']:.5f}: C'_sup={r['C_sup']:.3f} C'_L2={r['C_l2']:.3f} "
          f"sup error at lam=h^(2tau-d): {r['schedule_sup_error']:.3e}")
print(f"scheduled sup-error slope {probe.data['slope']:.3f} (target {probe.data['target_slope']})")
