"""Cross-shaped register layout: two orthogonal chains sharing a central qubit."""

from __future__ import annotations

from dataclasses import dataclass

from .circuit import Circuit, GateOp


def chain_pairs(chain) -> list[tuple[int, int]]:
    """Consecutive index pairs along an ordered chain."""
    return [(chain[i], chain[i + 1]) for i in range(len(chain) - 1)]


@dataclass(frozen=True)
class CrossLayout:
    """4N+1 qubits in two chains of length 2N+1 that intersect only at the center.

    The vertical chain hosts the Z-basis device, the horizontal chain the
    X-basis device; both run through the shared system qubit at `center`.
    """

    arm_half: int
    center: int
    vertical_arm: tuple[int, ...]
    horizontal_arm: tuple[int, ...]
    adjacency: frozenset[tuple[int, int]]

    @property
    def n_qubits(self) -> int:
        return 4 * self.arm_half + 1

    @property
    def z_probes(self) -> tuple[int, ...]:
        return tuple(q for q in self.vertical_arm if q != self.center)

    @property
    def x_probes(self) -> tuple[int, ...]:
        return tuple(q for q in self.horizontal_arm if q != self.center)

    def is_adjacent(self, q1: int, q2: int) -> bool:
        return (min(q1, q2), max(q1, q2)) in self.adjacency

    def role_map(self, ancilla: int | None = None) -> dict[int, str]:
        roles = {self.center: "system"}
        roles.update({q: "z_probe" for q in self.z_probes})
        roles.update({q: "x_probe" for q in self.x_probes})
        if ancilla is not None:
            roles[ancilla] = "ancilla"
        return roles


def make_cross_layout(N: int) -> CrossLayout:
    """Build the cross with a fixed index assignment.

    Vertical chain takes indices 0..2N (center at N); the horizontal chain
    reuses the center and adds 2N fresh indices, so bitstring serializations
    are stable across runs.
    """
    if N < 1:
        raise ValueError("arm half-length must be >= 1")
    vertical = tuple(range(2 * N + 1))
    center = N
    first = tuple(range(2 * N + 1, 3 * N + 1))
    second = tuple(range(3 * N + 1, 4 * N + 1))
    horizontal = first + (center,) + second
    adjacency = frozenset(
        (min(a, b), max(a, b))
        for a, b in chain_pairs(vertical) + chain_pairs(horizontal)
    )
    return CrossLayout(N, center, vertical, horizontal, adjacency)


def validate_nearest_neighbor(circuit: Circuit, layout: CrossLayout) -> list[tuple[int, GateOp]]:
    """List every two-qubit op whose target pair is not an edge of the layout.

    Empty list means the circuit is legal on the hardware graph.
    """
    if circuit.n_qubits != layout.n_qubits:
        raise ValueError(f"circuit spans {circuit.n_qubits} qubits, layout has {layout.n_qubits}")
    return [(i, op) for i, op in circuit.two_qubit_ops()
            if not layout.is_adjacent(*op.targets)]
