"""
Test data lives outside the test code
=====================================

Each test case reads its inputs from an XML container keyed by case id,
so adding a variant means editing data, not code.
"""

from snowleopard.datacontainer import expected_value, lookup_case_data, parse_container

xml = """<tcs>
  <tc name="tc1" playername="man1" freq="50 or 25"/>
  <tc name="tc2" playername="man2" freq="29.97" freq_expected="29.97 Hz">
    <player name="backup" freq="50"/>
  </tc>
</tcs>"""

data = parse_container(xml)
print(data.as_nested())

# A case sees only its own map.
params = lookup_case_data(data, "tc2")
print("tc2:", params)

# "<key>_expected" overrides what validation should see in the back end.
print(expected_value(params, "freq"))
print(expected_value(params, "playername"))
