# coding: utf-8

# # Subgroup lattices
#
# All subgroups are found by joining cyclic subgroups until nothing new
# appears. Subgroups are bitmasks over a dense element table, so joins and
# inclusion tests are integer operations.

# In[1]:

from collections import Counter

from jordanlab.dsl import build
from jordanlab.subgroups import all_subgroups, max_abelian_order, minimal_normal_subgroups

S5 = build("S5")
L = all_subgroups(S5)
print(f"S5: {len(L)} subgroups in {len(L.classes)} conjugacy classes")
print("by order:", dict(sorted(Counter(r.order for r in L.records).items())))


# Normal subgroups and the largest abelian subgroup.

# In[2]:

print("normal orders:", [r.order for r in L.normal_records()])
print("largest abelian subgroup of S5 has order", max_abelian_order(S5))


# Minimal normal subgroups decide the socle shortcut. For the wreath-like
# group below the only minimal normal subgroup is A5 x A5, which is not abelian.

# In[3]:

W = build("(A5 * A5) : C2 [swap]")
print([(r.order, bool(r.is_abelian)) for r in minimal_normal_subgroups(W)])
