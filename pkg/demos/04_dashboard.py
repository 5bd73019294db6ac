"""
A dashboard over several runs
=============================

Report CSVs from any number of runs fold into one static HTML page with a
pass/fail pie chart.
"""

import tempfile
from pathlib import Path

from snowleopard.logreport import aggregate_reports, dashboard

root = Path(tempfile.mkdtemp())
runs = {
    "build_101": ["Pass", "Pass", "Fail", "Skipped"],
    "build_102": ["Pass", "Pass", "Pass", "Fail"],
}
paths = []
for name, statuses in runs.items():
    path = root / name / "report.csv"
    path.parent.mkdir()
    rows = ["id,start_time,end_time,status,bug_id"]
    rows += [f"tc{i},10:0{i},10:0{i + 1},{s},{'PR9' if s == 'Fail' else ''}" for i, s in enumerate(statuses)]
    path.write_text("\n".join(rows) + "\n")
    paths.append(path)

print(aggregate_reports(paths))
out = root / "dashboard.html"
out.write_text(dashboard(paths, title="Player releases"))
print("open", out)
