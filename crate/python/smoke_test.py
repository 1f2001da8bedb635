"""Smoke test for the `hqs` extension module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist && pip install dist/hqs-*.whl
then run `python python/smoke_test.py`.
"""

import math

import hqs

PLAQUETTE = "X@t-1:1 X@t-1:2 X@t-2:1 X@t-2:2"


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    plan = hqs.Plan("surface-code", lx=3, ly=4)
    assert (plan.lx, plan.ly, plan.model) == (3, 4, "surface-code"), plan

    assert close(plan.expectation(PLAQUETTE), 1.0)
    assert plan.stabilizer_expectation(PLAQUETTE) == 1
    assert plan.stabilizer_expectation("X@1:0") == 0

    # deviation does not depend on how many rows follow
    devs = [hqs.Plan(lx=3, ly=ly).deviation(PLAQUETTE, epsilon=1e-3) for ly in (4, 6)]
    assert devs[0] > 1e-3 and close(devs[0], devs[1], 1e-12), devs
    noisy = plan.expectation(PLAQUETTE, epsilon=1e-3)
    assert close(1.0 - noisy, devs[0], 1e-12)

    # noise on states and on the measured axis can only pull the value in
    trivial = hqs.Plan("trivial", lx=3, ly=3)
    z = trivial.expectation("Z@1:0")
    shrunk = trivial.expectation("Z@1:0", epsilon=0.1, state_noise="orthogonal", measurement_noise="shrink")
    assert abs(z) > 1e-3 and abs(shrunk) < abs(z), (z, shrunk)

    lower, upper = plan.eta(2, 3, 1, restarts=4, iterations=20)
    assert 0.0 <= lower <= upper <= 1e-10, (lower, upper)

    survivors, candidates, only_logical = hqs.row_annihilation(5)
    assert only_logical and candidates == 1023, (survivors, candidates)

    b = hqs.predicted_bound(1e-3, 4, c=2.0)
    assert close(b, 2.0 * 1e-3 * math.log(1e-3) ** 2)

    csv = hqs.sweep("lx = 3\nly = 4\neps_min = 1e-4\neps_max = 1e-2\neps_points = 5\n")
    assert csv.startswith("# hqs-sweep-v1")
    fit = hqs.fit_bound(csv)
    assert fit["points"] == 5 and 0.9 < fit["slope"] < 1.1, fit

    checks = hqs.verify("stabilizer")
    assert checks and all(passed for _, passed, _ in checks), checks

    try:
        hqs.Plan("surface-code", lx=4, ly=4)
    except ValueError:
        pass
    else:
        raise AssertionError("even lx accepted")

    try:
        hqs.Plan(lx=9, ly=9).expectation("Z@1:0")
    except hqs.DenseCeilingError:
        pass
    else:
        raise AssertionError("dense ceiling not enforced")

    print("smoke test passed: deviation %.6e, shrink %.6f -> %.6f" % (devs[0], z, shrunk))


if __name__ == "__main__":
    main()
