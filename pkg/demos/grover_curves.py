"""Print amplification curves for a few (N, M) pairs.

The monitor's premise: the more errors an attacker injected, the fewer
Grover iterations they would need to amplify one, so the k* column doubles
as a proxy for how exposed the sifted key is.
"""

from skyshield.grover import GroverReport

CASES = [(100, 15), (103, 21), (128, 4), (128, 0), (2000, 220)]

for n, m in CASES:
    rep = GroverReport.from_counts(n, m)
    curve = "  ".join(f"{p:.4f}" for p in rep.probs)
    kstar = "-" if rep.k_star is None else rep.k_star
    expq = "-" if rep.expected_queries is None else f"{rep.expected_queries:.2f}"
    print(f"N={n:<5} M={m:<4} k*={kstar!s:<2} E[queries]={expq:<6}")
    print(f"   P(k=0..7): {curve}")
