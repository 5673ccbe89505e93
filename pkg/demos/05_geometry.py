"""Fill and separation distances of the built-in node generators.

Run: python3 demos/05_geometry.py
"""
from specweak import Domain, fill_distance, generate_points, separation_distance

for d in (1, 2):
    dom = Domain.unit_cube(d)
    res = 4097 if d == 1 else 201
    for scheme in ("uniform-grid", "jittered-grid", "halton", "iid-uniform"):
        X = generate_points(scheme, 64, dom, seed=3)
        fd = fill_distance(X, dom, res)
        q = separation_distance(X)
        print(f"d={d} {scheme:13s} n={X.n:3d} h={fd.value:.4f} (+{fd.tolerance:.1e}) q={q:.4f} q/h={q / fd.value:.3f}")
