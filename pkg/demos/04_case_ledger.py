# coding: utf-8

# # The case ledger
#
# Each row bounds the Jordan constant for one geometric case and names a
# catalog group that attains or satisfies the bound. Rows backed only by
# external facts are marked as axioms and never computed.

# In[1]:

from collections import Counter

from jordanlab.ledger import Engine, load_ledger, verify_paper

rows = load_ledger()
print(len(rows), "rows;", dict(Counter(r.field for r in rows)))


# Verify every row and fold each field into its headline constant.

# In[2]:

res = verify_paper(engine=Engine(), jobs=4)
print(dict(Counter(r.verdict for r in res["_results"])))
for t in res["_theorems"]:
    print(t.summary())


# Lowering the enumeration cap turns solvable witnesses into "unverified"
# rows, and aggregation refuses to report a number.

# In[3]:

small = verify_paper(fields=("R",), engine=Engine(order_cap=50))
print("ok:", small["ok"])
print(small["_errors"][0])
