#!/usr/bin/env python3
"""SQL-aware matching: exact match, no-order match, and component F1.

Queries are normalized (keyword case, identifier case, quoting, spacing) and
decomposed into five clause-component sets: SELECT, FROM, WHERE, GROUP BY,
ORDER BY. Exact match compares whole normalized token sequences; no-order
match compares the five sets; component F1 gives partial credit per clause.
"""

from sqlbootstrap import equal_exact, equal_no_order, evaluate, parse_sql
from sqlbootstrap.metrics import render_eval_table

gold = ('SELECT COUNT(*) FROM incidents AS va '
        'WHERE va.aggressor = "pirates" AND va.victim = "container ship"')
reordered = ('SELECT COUNT(*) FROM incidents AS va '
             'WHERE va.victim = "container ship" AND va.aggressor = "pirates"')

a, b = parse_sql(gold), parse_sql(reordered)
print("normalized:", a.normalized)
print("\nWHERE decomposes into sub-components (split on top-level AND):")
for component in sorted(a.components["WHERE"]):
    print("  -", component)

print("\nsame conjuncts, different order:")
print("  equal_exact:   ", equal_exact(a, b))
print("  equal_no_order:", equal_no_order(a, b))

# Surface noise never matters: parsing normalizes case, quotes, spacing.
noisy = "select   count( * ) from INCIDENTS as VA where va.aggressor = 'pirates' and va.victim = 'container ship'"
print("\nnoisy spelling is exact-equal after normalization:",
      equal_exact(parse_sql(noisy), a))

# OR expressions stay atomic: only top-level AND splits a WHERE clause.
with_or = parse_sql('SELECT va.x FROM t AS va WHERE ( va.a = "1" OR va.b = "2" ) AND va.c = "3"')
print("\nWHERE with a disjunction decomposes into:")
for component in sorted(with_or.components["WHERE"]):
    print("  -", component)

# A small evaluation: reordering scores (0, 1, 1); a dropped GROUP BY costs
# exactly one of the five component slots.
gold_rows = [
    gold,
    "SELECT va.kind FROM t AS va WHERE va.x = '1' GROUP BY va.kind",
]
predictions = [
    reordered,
    "SELECT va.kind FROM t AS va WHERE va.x = '1'",
]
report = evaluate(predictions, gold_rows)
print("\n" + render_eval_table(report))
