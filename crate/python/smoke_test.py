"""Smoke test for the Python bindings.

Build the extension and place it next to this script, then run it:

    cargo build --release -p illdeath-py
    cp target/release/libilldeath_py.so python/illdeath.so
    python3 python/smoke_test.py
"""
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import illdeath  # noqa: E402

records = [
    illdeath.Record("A", 1.0, 1, 4.0, 2),
    illdeath.Record("B", 2.0, 2),
    illdeath.Record("C", 3.0, 1, 6.0, 2),
    illdeath.Record("D", 2.5, 0),
]
cohort = illdeath.Cohort(records)
assert len(cohort) == 4

assert math.isclose(illdeath.p01_check(cohort, 1.5, 3.5), 2 / 3)
assert math.isclose(illdeath.p01_mm(cohort, 1.5, 3.5), 0.5)
assert math.isclose(illdeath.p01_mm_stute(cohort, 1.5, 3.5), 0.5)
assert math.isclose(illdeath.var_check(cohort, 1.5, 3.5), 4 / 27)
assert math.isclose(illdeath.tsai_crowley_weight(cohort, 1.5, 3.5, 6.0), 0.5)
assert math.isclose(illdeath.ipcw_numerator(cohort, 1.5, 3.5), 3 / 8)
assert math.isclose(illdeath.estimate(cohort, 1.5, 3.5, "aj"), illdeath.p01_aalen_johansen(cohort, 1.5, 3.5))
assert len(cohort.landmark(1.5)) == 3

again = illdeath.Cohort.from_csv(cohort.to_csv())
assert [r.id for r in again.records()] == ["A", "B", "C", "D"]

try:
    illdeath.p01_check(cohort, 5.0, 3.0)
except illdeath.IllDeathError:
    pass
else:
    raise AssertionError("t < s must raise")

assert abs(illdeath.true_p01(10, 50) - 0.125) < 2e-3

study = illdeath.simulate_cohort("table2", rep=0)
ci = illdeath.bootstrap_ci(study, 10, 50, "check", n_boot=200, seed=3)
lo, hi = ci["quantile_ci"]
assert 0.0 <= lo <= hi <= 1.0 and ci["n_boot"] == 200
assert ci == illdeath.bootstrap_ci(study, 10, 50, "check", n_boot=200, seed=3)

rows = illdeath.run_monte_carlo("table3", reps=20)
assert [r["estimator"] for r in rows[::8]] == ["aj", "check"]

print("python smoke test passed")
