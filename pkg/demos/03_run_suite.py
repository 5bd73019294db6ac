"""
Running a suite against a mock application
==========================================

A suite CSV chooses which cases run. The harness gives every case its own
log, survives crashes and hangs, and writes a CSV report plus a result mail.
"""

import tempfile
from pathlib import Path

from snowleopard.datacontainer import parse_container
from snowleopard.harness import RunConfig, run_suite
from snowleopard.logreport import BugDb
from snowleopard.suite import parse_suite
from snowleopard.testlib import CaseRegistry, TestCaseDefinition, data_driven_case

suite = parse_suite(
    "test_case,run,priority\n"
    "tc1,Y,Bat\n"
    "tc2,Y,P1\n"
    "tc3,Y,P1\n"
    "tc4,N,P2\n",
    name="player",
)
data = parse_container("""<tcs>
  <tc name="tc1" playername="man1" freq="50"/>
  <tc name="tc2" playername="man2" freq="29.97" freq_expected="30"/>
  <tc name="tc3" playername="man3" freq="25"/>
  <tc name="tc4" playername="man4" freq="25"/>
</tcs>""")

# Cases without their own code fall back to the generic
# configure-then-validate case. tc3 gets a hand-written, buggy one.
registry = CaseRegistry(fallback=data_driven_case)


@registry.case("tc3")
class Tc3:
    def steps(self, params, driver, log):
        driver.open_page("Config")
        raise RuntimeError("driver lost the page")

    def cleanup(self, params, driver, log):
        log.info("tc3 cleanup still runs")


resets = []
logs = Path(tempfile.mkdtemp()) / "Logs"
result = run_suite(
    RunConfig(logs_root=logs, timeout=5),
    registry,
    suite=suite,
    data=data,
    bugdb=BugDb({"tc2": "PR2410"}),
    env_reset=lambda: resets.append("reset"),
)

for case in result.results:
    print(case.case_id, case.status.value, case.failure_kind and case.failure_kind.value, case.bug_id or "")
print("totals:", result.totals, "exit code:", result.exit_code, "resets:", len(resets))
print(result.report_path.read_text())
print((result.run_dir / "tc2.log").read_text())
print("mail:", result.mail_path)
