"""
Shrinking a combinatorial test space
====================================

Ten parameters with 26 values each would take more than a hundred
trillion test cases to enumerate. A pairwise covering set exercises every
value pair at a tiny fraction of that cost.
"""

from snowleopard import reduction

# A parameter spec is plain text: one "name: v1, v2, ..." line per parameter.
letters = ", ".join(chr(ord("a") + i) for i in range(26))
big = reduction.parse_param_spec("".join(f"p{i}: {letters}\n" for i in range(10)))
print("full product:", reduction.count_all(big))

# Enumerating that is refused outright rather than attempted.
try:
    reduction.gen_all(big)
except reduction.EnumerationCapError as exc:
    print("gen_all:", exc)

# The pairwise set is small and provably complete.
pairs = reduction.gen_tway(big, 2)
print("pairwise rows:", len(pairs), "complete:", reduction.verify_coverage(pairs).complete)

# On a small spec we can compare against the true optimum by brute force.
small = reduction.parse_param_spec("audio: on, off\nvideo: on, off\nsave: yes, no\n")
cset = reduction.gen_tway(small, 2)
print("3 binary parameters:", len(cset), "rows, optimum",
      reduction.min_size_bruteforce(small, 2, cap=8))
print(reduction.write_rows_csv(cset))

# Drop a row and the checker names exactly what is no longer covered.
broken = reduction.CoveringSet(small, 2, cset.rows[:-1])
for line in reduction.interactions_as_text(reduction.verify_coverage(broken).uncovered):
    print("uncovered:", line)
