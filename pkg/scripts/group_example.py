#!/usr/bin/env python3
"""Three friends picking a movie: settled opinions versus their initial ones."""

from socialrec.group import GroupSystem, aggregate, evolve_step, solve_equilibrium

members = ("jessica", "mike", "eric")
system = GroupSystem(
    members,
    alpha=[0.9, 0.9, 0.5],
    W=[[0.1, 0.1, 0.8], [0.1, 0.1, 0.8], [0.25, 0.25, 0.5]],
    opinions={"movieA": [2, 3, 5]},
)

p = system.initial("movieA")
print("step 0:", p.round(4).tolist())
for t in range(1, 6):
    p = evolve_step(system, "movieA", p)
    print(f"step {t}:", p.round(4).tolist())

res = solve_equilibrium(system, "movieA")
print("settled:", dict(zip(members, res.p_inf.round(4).tolist())))
print(f"group score (mean) {aggregate(res.p_inf):.4f} vs direct mean {aggregate(system.initial('movieA')):.4f}")
print("total influence V:\n", res.V.round(4))
