"""Typed gate instances and ordered gate programs with classical-control wiring."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path


class Gate(Enum):
    H = "h"
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    ZZ = "zz"
    XX = "xx"
    CNOT = "cnot"
    CRY = "cry"
    MEASURE = "measure"


PARAMETRIC_GATES = frozenset({Gate.RX, Gate.RY, Gate.RZ, Gate.ZZ, Gate.XX, Gate.CRY})
TWO_QUBIT_GATES = frozenset({Gate.ZZ, Gate.XX, Gate.CNOT, Gate.CRY})

QUBIT_ROLES = ("system", "x_probe", "z_probe", "ancilla")


@dataclass(frozen=True)
class GateOp:
    """One gate instance: kind, targets, optional angle and classical wiring.

    Controlled kinds (CNOT, CRY) use targets[0] as the control. MEASURE may
    record its outcome into classical bit `cbit`; any non-MEASURE op may carry
    `condition=(cbit, value)` and is then skipped unless the recorded bit
    matches.
    """

    gate: Gate
    targets: tuple[int, ...]
    param: float | None = None
    cbit: int | None = None
    condition: tuple[int, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        arity = 2 if self.gate in TWO_QUBIT_GATES else 1
        if len(self.targets) != arity:
            raise ValueError(f"{self.gate.value} expects {arity} target(s), got {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"duplicate targets on {self.gate.value}: {self.targets}")
        if min(self.targets) < 0:
            raise ValueError(f"negative qubit index in {self.targets}")
        if self.gate in PARAMETRIC_GATES:
            if self.param is None:
                raise ValueError(f"{self.gate.value} requires an angle")
            object.__setattr__(self, "param", float(self.param))
        elif self.param is not None:
            raise ValueError(f"{self.gate.value} takes no angle")
        if self.cbit is not None and self.gate is not Gate.MEASURE:
            raise ValueError("cbit is only meaningful on measure")
        if self.condition is not None:
            if self.gate is Gate.MEASURE:
                raise ValueError("measure ops cannot be conditioned")
            bit, value = self.condition
            if value not in (0, 1):
                raise ValueError("condition value must be 0 or 1")
            object.__setattr__(self, "condition", (int(bit), int(value)))


def h(q: int) -> GateOp:
    return GateOp(Gate.H, (q,))


def rx(q: int, beta: float, condition=None) -> GateOp:
    return GateOp(Gate.RX, (q,), beta, condition=condition)


def ry(q: int, theta: float, condition=None) -> GateOp:
    return GateOp(Gate.RY, (q,), theta, condition=condition)


def rz(q: int, beta: float, condition=None) -> GateOp:
    return GateOp(Gate.RZ, (q,), beta, condition=condition)


def zz(q1: int, q2: int, gamma: float) -> GateOp:
    return GateOp(Gate.ZZ, (q1, q2), gamma)


def xx(q1: int, q2: int, gamma: float) -> GateOp:
    return GateOp(Gate.XX, (q1, q2), gamma)


def cnot(control: int, target: int) -> GateOp:
    return GateOp(Gate.CNOT, (control, target))


def cry(control: int, target: int, theta: float) -> GateOp:
    return GateOp(Gate.CRY, (control, target), theta)


def measure(q: int, cbit: int | None = None) -> GateOp:
    return GateOp(Gate.MEASURE, (q,), cbit=cbit)


@dataclass
class Circuit:
    """Ordered gate program over a fixed-size register.

    `roles` tags qubits as system / x_probe / z_probe / ancilla; untagged
    circuits are fine for ad-hoc use. `readout_attached` marks that X-basis
    readout rotations were appended, so they cannot be attached twice.
    """

    n_qubits: int
    ops: list[GateOp] = field(default_factory=list)
    roles: dict[int, str] = field(default_factory=dict)
    readout_attached: bool = False

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("circuit needs at least one qubit")

    def append(self, op: GateOp) -> None:
        self.ops.append(op)

    def extend(self, ops) -> None:
        self.ops.extend(ops)

    def validate(self) -> None:
        """Raise ValueError on out-of-range targets, bad roles, or conditions
        that do not reference an earlier recorded measurement bit."""
        recorded: set[int] = set()
        for i, op in enumerate(self.ops):
            if max(op.targets) >= self.n_qubits:
                raise ValueError(f"op {i} ({op.gate.value}) targets {op.targets} "
                                 f"outside {self.n_qubits}-qubit register")
            if op.condition is not None and op.condition[0] not in recorded:
                raise ValueError(f"op {i} conditioned on classical bit {op.condition[0]} "
                                 "before any measure records it")
            if op.gate is Gate.MEASURE and op.cbit is not None:
                recorded.add(op.cbit)
        for q, role in self.roles.items():
            if not 0 <= q < self.n_qubits:
                raise ValueError(f"role tag on out-of-range qubit {q}")
            if role not in QUBIT_ROLES:
                raise ValueError(f"unknown qubit role {role!r}")

    def two_qubit_ops(self):
        """Yield (index, op) for every two-qubit gate in program order."""
        for i, op in enumerate(self.ops):
            if op.gate in TWO_QUBIT_GATES:
                yield i, op

    def copy(self) -> Circuit:
        return Circuit(self.n_qubits, list(self.ops), dict(self.roles), self.readout_attached)

    def to_dict(self) -> dict:
        gates = []
        for op in self.ops:
            entry: dict = {"gate": op.gate.value, "targets": list(op.targets)}
            if op.param is not None:
                entry["param"] = op.param
            if op.cbit is not None:
                entry["cbit"] = op.cbit
            if op.condition is not None:
                entry["condition"] = list(op.condition)
            gates.append(entry)
        doc: dict = {"n_qubits": self.n_qubits, "gates": gates}
        if self.roles:
            doc["roles"] = {str(q): role for q, role in sorted(self.roles.items())}
        if self.readout_attached:
            doc["readout_attached"] = True
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> Circuit:
        ops = []
        for entry in doc.get("gates", []):
            ops.append(GateOp(
                Gate(entry["gate"]),
                tuple(entry["targets"]),
                entry.get("param"),
                cbit=entry.get("cbit"),
                condition=tuple(entry["condition"]) if "condition" in entry else None,
            ))
        roles = {int(q): role for q, role in doc.get("roles", {}).items()}
        return cls(int(doc["n_qubits"]), ops, roles, bool(doc.get("readout_attached", False)))

    def to_json(self, path: str | Path | None = None, indent: int | None = 2) -> str:
        text = json.dumps(self.to_dict(), indent=indent, sort_keys=True)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text

    @classmethod
    def from_json(cls, source: str | Path) -> Circuit:
        text = Path(source).read_text() if isinstance(source, Path) else source
        return cls.from_dict(json.loads(text))
