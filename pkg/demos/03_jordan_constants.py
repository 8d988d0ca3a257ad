# coding: utf-8

# # Jordan constants of finite groups
#
# nu(G) is the least index of a normal abelian subgroup, abar(G) the least
# index of any abelian subgroup. J(G) is the maximum of nu over all
# subgroups, Jbar(G) the maximum of abar, which for a finite group is abar(G).

# In[1]:

from jordanlab.dsl import catalog_by_label
from jordanlab.jordan import jordan_report

cat = catalog_by_label()
print(f"{'group':16} {'order':>6} {'nu':>5} {'abar':>5} {'J':>5} {'Jbar':>5}  method")
for label in ("S4", "A5", "S5", "A6", "heis-54", "heis-108", "fermat-648", "psl27xC2", "swap-A5"):
    r = jordan_report(cat[label].group, label)
    print(f"{label:16} {r.order:6} {r.nu:5} {r.abar:5} {str(r.J):>5} {r.Jbar:5}  {r.method}")


# Above the enumeration cap the engine either proves nu = |G| from the socle
# or falls back to bounds max(nu, abar) <= J <= min(|G|, abar^2).

# In[2]:

r = jordan_report(cat["psl27xC2"].group, "psl27xC2", order_cap=100)
print(r.method, "J in", f"[{r.J.lower}, {r.J.upper}]")


# The Chermak-Delgado measure |H| |C_G(H)| explains J <= Jbar^2: its maximizers
# contain an abelian subgroup that is normal.

# In[3]:

from jordanlab.jordan import cd_lattice
from jordanlab.subgroups import all_subgroups

for label in ("S3", "D4", "S4"):
    G = cat[label].group
    L = all_subgroups(G)
    ents = cd_lattice(G)
    print(label, "max measure", ents[0].measure, "member orders", sorted(L.records[e.record].order for e in ents))
