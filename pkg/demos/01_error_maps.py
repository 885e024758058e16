"""A tour of error maps: the sparse distributions behind the simulator.

An error map assigns probabilities to Pauli strings — joint error
scenarios over a group of qubits.  Noise events branch the map, gates
permute its keys, and pruning thresholds decide which branches are worth
keeping.  Everything downstream (recovery circuits, crash rates) is
built out of these moves.

Run:  python3 demos/01_error_maps.py
"""

from paulitree import (
    ErrorMap,
    MergeMode,
    QubitSet,
    Thresholds,
    apply_cnot,
    apply_one_qubit_event,
    merge,
    split,
    total_probability,
)

# Start from two error-free qubits and let a decoherence event with a
# 10% trigger probability act on qubit 0.  The error-free entry splits
# into a pass branch and three equally likely error branches.
qs = QubitSet.error_free([0, 1])
qs = apply_one_qubit_event(qs, 0, 0.10, Thresholds())
print("after a 10% event on qubit 0:")
print(qs.map.dump())

# A CNOT does not create or destroy probability; it relabels.  The X
# component of the control copies onto the target, so the XI branch
# becomes XX — a two-qubit error made from a one-qubit fault.
qs = apply_cnot(qs, 0, 1)
print("\nafter CNOT 0 -> 1 (X spreads, Z would flow the other way):")
print(qs.map.dump())
print("total probability:", total_probability(qs))

# Pruning: with an event branch threshold of 5%, entries below 5% pass
# through unexpanded.  The three 3.3% branches stay put; only the big
# pass-through entry branches again.
pruned = apply_one_qubit_event(qs, 1, 0.10, Thresholds(event_branch=0.05))
exact = apply_one_qubit_event(qs, 1, 0.10, Thresholds())
print("\nentries after another event  exact: %d   pruned at 5%%: %d"
      % (len(exact.map), len(pruned.map)))
print("both conserve mass:", total_probability(exact), total_probability(pruned))

# Merging two independent sets takes a cross product.  The merge
# threshold bounds how small a joint probability is worth storing;
# Preservation keeps sub-threshold mass by collapsing it onto the more
# probable side's labels, Lossy just drops it.
a = QubitSet((0,), ErrorMap.from_dict({"I": 0.9, "X": 0.1}))
b = QubitSet((1,), ErrorMap.from_dict({"I": 0.95, "Z": 0.05}))
for mode in (MergeMode.PRESERVATION, MergeMode.LOSSY):
    out = merge(a, b, Thresholds(merge=0.02, merge_mode=mode))
    print("\nmerge at threshold 0.02, %s:" % mode.value)
    print(out.map.dump())
    print("total:", total_probability(out))

# Splitting is the inverse for independent sets: each side gets its
# marginal back.  (Correlations, if any, are deliberately discarded —
# that is why the engine only splits freshly reset ancilla qubits.)
joint = merge(a, b, Thresholds())
left, right = split(joint, keep=[0])
print("\nsplit marginals:", dict(left.map.items()), dict(right.map.items()))
