"""
A small experiment sweep written to disk
========================================

Run a reduced grid through the same machinery the command line uses, then
aggregate the per-run rows and render the report.
"""

# %%
import tempfile
from pathlib import Path

from delaystream.experiment import plan_from_dict, run_experiment

plan = plan_from_dict({
    "streams": {"n_chunks": 120, "n_drifts": [3]},
    "frameworks": ["CR", "TR_U", "TR_P"],
    "detectors": ["ORACLE", "OCDD", "MD3"],
    "classifiers": ["GNB"],
    "deltas": [1, 20],
    "seeds": {"start": 0, "count": 3},
})
print(len(plan.runs), "runs")

# %%
out = Path(tempfile.mkdtemp()) / "sweep"
art = run_experiment(plan, out, jobs=1)
print(sorted(p.name for p in out.iterdir()))

# %%
print(art.aggregate.read_text())
