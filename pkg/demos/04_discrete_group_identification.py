"""The discrete worked example: identify the group, not the object.

Four objects fall into two groups; binary queries split the object set.
The greedy selector scores each query by how evenly it splits the prior
mass (reduction factor) against how badly it splits the groups (group
reduction factors), and asks the best one.
"""

from acquest.datasets import heroes_instance
from acquest.gisa import discrete_gisa, render_tree, select_discrete_query

instance = heroes_instance()
print("objects:", ", ".join(f"{o} [{g}]" for o, g in
                            zip(instance.objects, instance.group_of)))

chosen, scores = select_discrete_query(instance)
print("\nquery scores under uniform priors:")
for name, s in zip(instance.queries, scores):
    reductions = ", ".join(f"{g}={r:.2f}" for g, r in
                           zip(instance.groups, s.group_reductions))
    print(f"  {name}: split {s.left_prob:.2f}/{s.right_prob:.2f}, "
          f"group reductions ({reductions}), objective {s.objective:.3f}")
print(f"chosen first query: {instance.queries[chosen]} "
      f"(splits the mass in half AND keeps both groups whole)")

result = discrete_gisa(instance)
print("\ngreedy decision tree:")
print(render_tree(instance, result.root), end="")
print(f"expected queries to identify the group: {result.expected_queries:g}")

# prior knowledge changes the choice: without the object that answers
# "no" to everything, two queries become equally perfect
reduced = instance.reweighted([0.25, 0.25, 0.25, 0.0])
_, scores = select_discrete_query(reduced)
print("\nwith the fourth object ruled out:")
for name, s in zip(instance.queries, scores):
    print(f"  {name}: objective {s.objective:.3f}")
