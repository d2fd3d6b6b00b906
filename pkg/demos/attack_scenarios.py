"""Run the four attack scenarios back to back and print their reports."""

from skyshield.experiments import run_scenario, scenario_report

for scenario in "ABCD":
    outcome, _ = run_scenario(scenario)
    print(scenario_report(scenario, outcome))
    print()
