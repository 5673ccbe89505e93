"""Monte Carlo weak-error rates for both classes of test functionals.

The first study pairs the error with a smoothed indicator seen through the
adjoint, the second with an indicator that is a finite combination of
features. Each prints the fitted log-log slope next to the predicted rate.

Run: python3 demos/03_weak_error_rates.py [output-dir]
"""
import sys

from specweak import ExperimentConfig, run_rate_study

out = sys.argv[1] if len(sys.argv) > 1 else "demo-out"
studies = {
    "adjoint": ExperimentConfig(output_dir=f"{out}/adjoint"),
    "a1": ExperimentConfig(output_dir=f"{out}/a1",
                           functional={"class": "a1", "nodes": [0.2, 0.7], "weights": [-1.0, 1.0]},
                           lambda_rule={"optimal": {"class": "a1", "trace_class": True}}),
}
for name, cfg in studies.items():
    st = run_rate_study(cfg)
    print(f"{name}: slope {st.slope:.3f} +/- {st.stderr:.3f}, predicted -{st.theoretical:.3f}")
    for r in st.records:
        flag = "" if r.mean_abs_weak_error <= r.bound_value else "  (above bound)"
        print(f"  n={r.n:5d} lam={r.lam:.3e} err={r.mean_abs_weak_error:.3e} bound={r.bound_value:.3e}{flag}")
    print("  wrote", ", ".join(st.files))
