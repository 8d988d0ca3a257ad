# coding: utf-8

# # Permutation groups
#
# Groups are given by generators. A deterministic Schreier-Sims chain gives
# the order and a membership test; everything else is built on top of it.

# In[1]:

from jordanlab import Permutation, center, derived_subgroup, quotient
from jordanlab.dsl import build

P = Permutation.from_cycles


# Composition is right to left: `(p * q)(i) == p(q(i))`.

# In[2]:

p = P([(0, 1, 2)], 4)
q = P([(2, 3)], 4)
print("p*q =", p * q, " q*p =", q * p)


# The expression language builds familiar groups. `Dn` has order 2n.

# In[3]:

for expr in ("S5", "D6", "Heis(3)", "PSL(2,7)", "(A5 * A5) : C2 [swap]"):
    G = build(expr)
    print(f"{expr:24} order {G.order:5}  degree {G.degree:3}  base {G.base}")


# Membership comes from sifting through the chain.

# In[4]:

A5 = build("A5")
print("(0 1 2) in A5:", P([(0, 1, 2)], 5) in A5)
print("(0 1)   in A5:", P([(0, 1)], 5) in A5)


# Structural subgroups.

# In[5]:

S4 = build("S4")
print("|Z(S4)| =", center(S4).order, " |S4'| =", derived_subgroup(S4).order)
V4 = derived_subgroup(derived_subgroup(S4))
Q, phi = quotient(S4, V4)
print("S4/V4 has order", Q.order, "on", Q.degree, "points; abelian:", Q.is_abelian())
