"""Steane [[7,1,3]] code machinery: recovery circuits and readout kernels.

The code stores one logical qubit in a 7-qubit block and corrects any
single-qubit error.  Recovery runs in two sequential phases: the *bit*
phase detects and corrects X errors, the *phase* phase Z errors (a Y
counts in both).  Each phase prepares three verified logical-ancilla
blocks, extracts the syndrome into each, majority-votes the three
syndromes, and applies the decoded single-qubit correction, so that a
faulty ancilla or measurement cannot outvote two good extractions.

``build_recovery`` emits the full cycle-level circuit onto a
:class:`~paulitree.program.Schedule`.  The ``*_kernel`` functions are
the deterministic error-map transformations behind the readout tasks;
the analytical engine applies them to probability vectors, the Monte
Carlo engine applies the same logic to sampled strings.
"""

from __future__ import annotations

import math

import numpy as np

from .errormap import ErrorMap, _aggregate, _slot
from .pauli import Pauli, PauliString
from .program import Correct, CosetReduce, Schedule, SyndromeMeasure, VerifyReadout

_U64 = np.uint64

#: Parity-check matrix; row r of the syndrome is the parity of the error
#: bits at the columns where the row is 1.  Column j reads, top to
#: bottom, as the binary digits of j + 1, so the 3-bit syndrome value
#: directly names the errored position.
CHECK_MATRIX = np.array(
    [
        [0, 0, 0, 1, 1, 1, 1],
        [0, 1, 1, 0, 0, 1, 1],
        [1, 0, 1, 0, 1, 0, 1],
    ],
    dtype=np.uint8,
)

#: Logical-zero encoder: Hadamards on the three generator qubits, then
#: three cycles of disjoint CNOT pairs (control, target).
ENCODER_HADAMARDS = (0, 1, 3)
ENCODER_CNOT_CYCLES = (
    ((3, 4), (1, 2), (0, 6)),
    ((3, 5), (1, 6), (0, 2)),
    ((3, 6), (1, 5), (0, 4)),
)


def decode_table() -> dict[int, int | None]:
    """Syndrome value (s0 s1 s2 read as binary) to errored position.

    Syndrome 0 means no error.  With the check matrix above the mapping
    is simply value - 1.
    """
    table: dict[int, int | None] = {0: None}
    for v in range(1, 8):
        table[v] = v - 1
    return table


def decode_table_text() -> str:
    """Human-readable decode table, one ``syndrome -> position`` per line."""
    lines = []
    for v, pos in decode_table().items():
        lines.append("%d%d%d -> %s" % (v >> 2, (v >> 1) & 1, v & 1,
                                       "none" if pos is None else "qubit %d" % pos))
    return "\n".join(lines)


#: block length and correctable weight of the codes the estimator knows
CODE_PARAMS = {"steane713": (7, 1), "golay2135": (21, 2)}


def count_nonfailing_states(code, max_weight: int | None = None) -> int:
    """Number of Pauli strings per block with weight at most the code's
    correctable weight: sum of C(n, w) * 3^w for w = 0..t.

    These are the states a distance-(2t+1) block code keeps correctable;
    the complement is the failure region the crash observable counts.
    ``code`` is a known code name ("steane713", "golay2135") or a block
    length given together with an explicit ``max_weight``.
    """
    if isinstance(code, str):
        try:
            n_qubits, max_weight = CODE_PARAMS[code.lower()]
        except KeyError:
            raise ValueError("unknown code %r" % (code,))
    else:
        n_qubits = code
        if max_weight is None:
            raise ValueError("max_weight is required with an explicit block length")
    return sum(math.comb(n_qubits, w) * 3**w for w in range(max_weight + 1))


# -- circuit emission ----------------------------------------------------


def prepare_ancilla(sched: Schedule, block: tuple[int, ...], basis: str) -> None:
    """Encode a fresh logical ancilla in ``block``.

    ``basis`` "z" leaves the logical zero; "x" appends a transversal
    Hadamard for the logical plus state used by phase-error extraction.
    """
    sched.cycle(resets=block)
    sched.cycle(hadamards=[block[i] for i in ENCODER_HADAMARDS])
    for pairs in ENCODER_CNOT_CYCLES:
        sched.cycle(cnots=[(block[c], block[t]) for c, t in pairs])
    if basis == "x":
        sched.cycle(hadamards=block)
    elif basis != "z":
        raise ValueError("basis must be 'z' or 'x', got %r" % (basis,))


def verify_ancilla(sched: Schedule, block: tuple[int, ...], verifier: int,
                   basis: str) -> None:
    """Check the ancilla block for the error type that would propagate
    into the data during extraction, reusing one verifier qubit to
    measure the three parity checks of that type in sequence.

    A "z" ancilla is the extraction CNOT's target, so its Z errors copy
    back onto the data: per check row, the verifier starts in the plus
    state, controls a CNOT onto each row qubit to collect their Z
    parity, and is Hadamard-ed back for readout.  An "x" ancilla is the
    control, so its X errors copy forward: row-to-verifier CNOTs collect
    the X parity directly.  Measuring the full syndrome rather than one
    overall parity keeps the check distance-3, so every weight-1 or -2
    dangerous error from a single preparation fault is caught.  (Errors
    of the other type only corrupt this block's measured syndrome, which
    the three-way majority vote absorbs.)  A detected fault discards the
    block for a fresh one.
    """
    if basis not in ("z", "x"):
        raise ValueError("basis must be 'z' or 'x', got %r" % (basis,))
    for row in CHECK_MATRIX:
        checked = [block[j] for j in range(7) if row[j]]
        sched.cycle(resets=[verifier])
        if basis == "z":
            sched.cycle(hadamards=[verifier])
            for q in checked:
                sched.cycle(cnots=[(verifier, q)])
            sched.cycle(hadamards=[verifier])
        else:
            for q in checked:
                sched.cycle(cnots=[(q, verifier)])
        sched.cycle(measures=[verifier])
        sched.task(VerifyReadout(tuple(block), verifier))


def extract_syndrome(sched: Schedule, data: tuple[int, ...],
                     block: tuple[int, ...], phase: str, slot: int) -> None:
    """Copy the data block's errors of one kind onto the ancilla and
    measure it, leaving the 3-bit syndrome stored in the block.

    The coset reduction beforehand removes accumulated ancilla error
    patterns that act trivially on the encoded ancilla state (stabilizer
    and trivial-logical combinations); physically those never existed,
    and without the reduction they would be wrongly copied into the data
    block by the extraction CNOTs.
    """
    if phase == "bit":
        sched.task(CosetReduce(tuple(block), "z"))
        sched.cycle(cnots=list(zip(data, block)))
    elif phase == "phase":
        sched.task(CosetReduce(tuple(block), "x"))
        sched.cycle(cnots=list(zip(block, data)))
        sched.cycle(hadamards=block)
    else:
        raise ValueError("phase must be 'bit' or 'phase', got %r" % (phase,))
    sched.cycle(measures=block)
    sched.task(SyndromeMeasure(tuple(block), slot))


def apply_correction(sched: Schedule, data: tuple[int, ...],
                     ancilla_blocks: tuple[tuple[int, ...], ...], phase: str) -> None:
    """Majority-vote the three stored syndromes and correct the data block.

    The classical decode and the conditional corrective pulse occupy one
    cycle; the correction itself is modeled error-free (its imprecision
    is far below the decoherence accrued while decoding).
    """
    sched.cycle()
    sched.task(Correct(tuple(data), tuple(tuple(b) for b in ancilla_blocks), phase))


def build_recovery(sched: Schedule, data: tuple[int, ...],
                   ancilla_blocks: tuple[tuple[int, ...], ...], verifier: int,
                   transport_um: float = 0.0) -> None:
    """Full fault-tolerant recovery of one data block: bit phase then
    phase phase, three verified syndrome extractions each."""
    del transport_um  # recovery is local; transport shows up between blocks
    for phase, basis in (("bit", "z"), ("phase", "x")):
        for slot, block in enumerate(ancilla_blocks):
            prepare_ancilla(sched, block, basis)
            verify_ancilla(sched, block, verifier, basis)
            extract_syndrome(sched, data, block, phase, slot)
        apply_correction(sched, data, ancilla_blocks, phase)


# -- analytical readout kernels -----------------------------------------


def _xbits(keys: np.ndarray, q: int) -> np.ndarray:
    """Per-entry X component (bit 0 of the 2-bit label) at local position q."""
    w, s = _slot(q)
    return (keys[:, w] >> _U64(s)) & _U64(1)


def _clear_mask(nwords: int, positions: list[int]) -> np.ndarray:
    mask = np.full(nwords, ~_U64(0), dtype=_U64)
    for q in positions:
        w, s = _slot(q)
        mask[w] &= ~(_U64(3) << _U64(s))
    return mask


def _recanonicalize(emap: ErrorMap) -> None:
    emap._keys, emap._probs = _aggregate(emap._keys, emap._probs)
    emap._v = None
    emap._dirty = False


def verify_kernel(emap: ErrorMap, block: list[int], verifier: int) -> None:
    """Apply the verification readout to an error map in place.

    Entries where the verifier carries an X component are the detected
    branch: their ancilla block is replaced by an error-free one (the
    retry-until-success model).  The verifier is cleared everywhere.
    """
    emap._ensure_ready()
    keys = emap._keys
    detected = _xbits(keys, verifier) != 0
    if detected.any():
        keys[detected] &= _clear_mask(keys.shape[1], block)
    keys &= _clear_mask(keys.shape[1], [verifier])
    _recanonicalize(emap)


def syndrome_kernel(emap: ErrorMap, block: list[int]) -> None:
    """Apply the syndrome readout to an error map in place.

    The measured classical bits are the X components of the ancilla
    block; the three parity-check sums replace the block's state, stored
    as X labels at the block's first three positions.
    """
    emap._ensure_ready()
    keys = emap._keys
    bits = [_xbits(keys, q) for q in block]
    syndrome = [
        np.bitwise_xor.reduce([bits[j] for j in range(7) if CHECK_MATRIX[r, j]])
        for r in range(3)
    ]
    keys &= _clear_mask(keys.shape[1], list(block))
    for r in range(3):
        w, s = _slot(block[r])
        keys[:, w] |= syndrome[r] << _U64(s)
    _recanonicalize(emap)


def coset_reduce_kernel(emap: ErrorMap, block: list[int], basis: str) -> None:
    """Reduce the block's trivially-acting error component in place.

    For a logical-zero ancilla (basis "z") the Z patterns that act as
    the identity are exactly the kernel of the check matrix (Z
    stabilizers plus the trivial logical Z), so each entry's Z component
    collapses to the weight<=1 decode of its own syndrome; basis "x" is
    the same statement for X patterns on a logical-plus ancilla.  The
    complementary component only ever feeds the measured syndrome, which
    is invariant under stabilizer shifts, so it is left untouched.
    """
    if basis == "z":
        shift = 1  # Z component is the high bit of the 2-bit label
    elif basis == "x":
        shift = 0
    else:
        raise ValueError("basis must be 'z' or 'x', got %r" % (basis,))
    emap._ensure_ready()
    keys = emap._keys
    bits = []
    for q in block:
        w, s = _slot(q)
        bits.append((keys[:, w] >> _U64(s + shift)) & _U64(1))
    syndrome = [
        np.bitwise_xor.reduce([bits[j] for j in range(7) if CHECK_MATRIX[r, j]])
        for r in range(3)
    ]
    value = (4 * syndrome[0] + 2 * syndrome[1] + syndrome[2]).astype(np.int64)
    for j, q in enumerate(block):
        w, s = _slot(q)
        keys[:, w] &= ~(_U64(1) << _U64(s + shift))
        hit = value == j + 1
        if hit.any():
            keys[hit, w] |= _U64(1) << _U64(s + shift)
    _recanonicalize(emap)


def _majority_syndrome(keys: np.ndarray, blocks: list[list[int]]) -> np.ndarray:
    """Per-entry majority vote over the three stored 3-bit syndromes;
    entries with three-way disagreement vote 0 (no correction)."""
    vals = []
    for block in blocks:
        v = (
            4 * _xbits(keys, block[0])
            + 2 * _xbits(keys, block[1])
            + _xbits(keys, block[2])
        )
        vals.append(v.astype(np.int64))
    v0, v1, v2 = vals
    return np.where(
        (v0 == v1) | (v0 == v2), v0, np.where(v1 == v2, v1, 0)
    )


def correct_kernel(emap: ErrorMap, data: list[int],
                   ancilla_blocks: list[list[int]], phase: str) -> None:
    """Decode and apply the voted correction to an error map in place.

    The correction composes an X (bit phase) or Z (phase phase) onto the
    decoded data position of each entry; the spent ancilla blocks are
    cleared for reuse.
    """
    if phase == "bit":
        label = int(Pauli.X)
    elif phase == "phase":
        label = int(Pauli.Z)
    else:
        raise ValueError("phase must be 'bit' or 'phase', got %r" % (phase,))
    emap._ensure_ready()
    keys = emap._keys
    maj = _majority_syndrome(keys, ancilla_blocks)
    for pos in range(7):
        hit = maj == pos + 1
        if hit.any():
            w, s = _slot(data[pos])
            keys[hit, w] ^= _U64(label) << _U64(s)
    keys &= _clear_mask(keys.shape[1], [q for b in ancilla_blocks for q in b])
    _recanonicalize(emap)


def surviving_mass(emap: ErrorMap, blocks: list[list[int]]) -> float:
    """Probability mass of entries where every listed block carries at
    most one errored qubit, i.e. remains correctable."""
    emap._ensure_ready()
    keys = emap._keys
    ok = np.ones(keys.shape[0], dtype=bool)
    for block in blocks:
        weight = np.zeros(keys.shape[0], dtype=np.int64)
        for q in block:
            w, s = _slot(q)
            weight += ((keys[:, w] >> _U64(s)) & _U64(3)) != 0
        ok &= weight <= 1
    return float(emap._probs[ok].sum())


def classify_crash(state: PauliString, blocks: list[list[int]]) -> bool:
    """True when some block carries more than one errored qubit."""
    labels = state.labels()
    for block in blocks:
        if sum(1 for q in block if labels[q] != Pauli.I) > 1:
            return True
    return False
