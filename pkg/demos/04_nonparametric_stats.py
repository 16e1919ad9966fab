#!/usr/bin/env python3
"""Tour of the statistics core: exact Mann-Whitney, correction, tables."""

import random

from passagelab.stats import ScoreRecord, aggregate, bonferroni, mann_whitney_u

def main() -> None:
    print("Exact enumeration on a tiny pair (a=[1,2], b=[3,4]):")
    result = mann_whitney_u([1, 2], [3, 4])
    print(f"  U={result.u_statistic}  p={result.p_value:.4f}  method={result.method.value}")

    print("\nIdentical samples are a perfect null:")
    result = mann_whitney_u([1, 2, 3], [1, 2, 3])
    print(f"  U={result.u_statistic}  p={result.p_value}  ties={result.tie_corrected}")

    print("\nLarge separated samples go through the normal approximation:")
    rng = random.Random(0)
    a = [rng.gauss(0, 1) for _ in range(30)]
    b = [rng.gauss(2, 1) for _ in range(30)]
    result = mann_whitney_u(a, b)
    print(f"  U={result.u_statistic}  p={result.p_value:.2e}  method={result.method.value}")

    print("\nBonferroni correction clamps at 1:")
    print(f"  raw [.01, .04, .5] with m=3 -> {bonferroni([0.01, 0.04, 0.5], 3)}")

    print("\nGrade-grouped comparison table from raw score records:")
    records = []
    for grade in (1, 2, 3):
        for value in (3, 4, 4, 3, 4):
            records.append(ScoreRecord("Curriculum Alignment", grade, "BASE", value))
        for value in (5, 4, 5, 5, 4):
            records.append(ScoreRecord("Curriculum Alignment", grade, "COGENT", value))
    table = aggregate(records, m=1, condition_order=["BASE", "COGENT"])
    print(table.to_tsv())
    print("per-grade means:")
    for point in table.per_grade:
        print(f"  grade {point.grade}  {point.condition:6s} mean {point.mean:.2f} (n={point.n})")


if __name__ == "__main__":
    main()
