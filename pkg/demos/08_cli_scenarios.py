"""
Scenario runner
===============

Run a built-in scenario and a sweep from Python; the same thing from a
shell is ``wptsim run fig7-smf`` and ``wptsim sweep cfg.toml --var M --values 1,2,4``.
"""

import csv
import tempfile
from pathlib import Path

from wptsim.scenario import load_scenario, run, sweep, validate

out = Path(tempfile.mkdtemp())
path = run(load_scenario("fig7-smf"), output_dir=out)
for row in csv.DictReader(open(path / "results.csv")):
    print(f"tone {row['tone']:>2}  |h| {float(row['channel_norm']):.3f}  power {float(row['power_w']):.2e} W")

sc = validate("""
seed = 1
name = "antennas"
realizations = 20
[channel]
model = "flat"
""")
path = sweep(sc, "M", [1, 2, 4, 8], output_dir=out)
rows = [r for r in csv.DictReader(open(path / "sweep.csv")) if r["metric"] == "p_dc_w"]
for m in (1, 2, 4, 8):
    vals = [float(r["metric_value"]) for r in rows if int(r["value"]) == m]
    print(f"M={m}: p_dc {sum(vals) / len(vals):.3e} W")
print("outputs in", out)
