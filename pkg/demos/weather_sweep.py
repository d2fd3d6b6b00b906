"""A compact weather/distance sweep with a printed cell table.

Same machinery as the `skyshield run-sweep` subcommand but sized to finish
in about a second; writes the three artifact files under demo_out/.
"""

from skyshield.experiments import SweepSpec, run_sweep, write_sweep_outputs

spec = SweepSpec(distances_km=(1.0, 3.0, 5.0), sessions_per_cell=10,
                 seed_base=20250823)
result = run_sweep(spec)

print(f"{'weather':<8}{'km':>4}{'sift':>8}{'qber':>8}{'abort':>8}{'auth':>8}")
for cell in result.cells:
    qber = "-" if cell.mean_qber is None else f"{cell.mean_qber:.3f}"
    print(f"{cell.weather:<8}{cell.distance_km:>4.0f}"
          f"{cell.mean_sifted_len:>8.1f}{qber:>8}"
          f"{cell.abort_rate:>8.2f}{cell.auth_success_rate:>8.2f}")

paths = write_sweep_outputs(result, "demo_out")
print()
for name in sorted(paths):
    print(f"wrote {paths[name]}")
