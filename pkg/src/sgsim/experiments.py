"""Sequential measurement experiments on the cross layout: both device
orders, the parity-decoded interferometer, and the delayed-choice variant."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ansatz import (READOUT_ANGLE, ParamSet, attach_readout_rotations,
                     build_reference_cat, build_sg_x, build_sg_z)
from .circuit import Circuit, cry, measure, ry
from .layout import CrossLayout
from .state import (ShotHistogram, StateVector, apply_circuit, apply_gate,
                    born_probabilities, histogram_from_samples, project_qubit,
                    qubit_state, sample_shots)

ORDERS = ("zx", "xz")
Z_LABELS = ("zero", "one", "ambiguous")
X_LABELS = ("plus", "minus", "ambiguous")
PARITY_LABELS = ("even", "odd")


def decode_collective(bits: str, basis: str) -> str:
    """Majority vote over a probe bitstring; an exact tie is 'ambiguous'.

    Basis 'z' votes zero/one. Basis 'x' votes plus/minus and assumes the
    readout rotations were applied, so bit 0 stands for |+>.
    """
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"not a probe bitstring: {bits!r}")
    labels = Z_LABELS if basis == "z" else X_LABELS if basis == "x" else None
    if labels is None:
        raise ValueError("basis must be 'z' or 'x'")
    ones = bits.count("1")
    if 2 * ones == len(bits):
        return labels[2]
    return labels[1] if 2 * ones > len(bits) else labels[0]


def parity_of(bits: str) -> str:
    """'even' iff the bitstring contains an even number of 1s."""
    return PARITY_LABELS[bits.count("1") % 2]


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment instance: device order, register size, sampling budget,
    input amplitudes of the system qubit, and the circuit source (a calibrated
    ParamSet, or None for the exact reference-cat circuits)."""

    N: int
    order: str = "zx"
    shots: int = 8192
    seed: int = 0
    a: complex = 1.0
    b: complex = 0.0
    params: ParamSet | None = None

    def __post_init__(self):
        if self.order not in ORDERS:
            raise ValueError(f"order must be one of {ORDERS}")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0) > 1e-12:
            raise ValueError("input amplitudes must satisfy |a|^2+|b|^2 = 1")
        if self.params is not None and self.params.N != self.N:
            raise ValueError(f"params built for N={self.params.N}, config has N={self.N}")

    @property
    def source(self) -> str:
        return "reference_cat" if self.params is None else "variational"


def _device_ops(basis: str, config: ExperimentConfig, layout: CrossLayout,
                n_qubits: int) -> list:
    chain = layout.vertical_arm if basis == "z" else layout.horizontal_arm
    if config.params is None:
        return build_reference_cat(basis, chain, n_qubits).ops
    builder = build_sg_z if basis == "z" else build_sg_x
    return builder(config.params, chain, n_qubits).ops


def build_experiment_circuit(config: ExperimentConfig, layout: CrossLayout,
                             *, readout: bool = True) -> Circuit:
    """Compose the two devices in configured order on the full register,
    optionally followed by the X-arm readout rotations."""
    if layout.arm_half != config.N:
        raise ValueError("layout and config disagree on N")
    circuit = Circuit(layout.n_qubits, roles=layout.role_map())
    first, second = ("z", "x") if config.order == "zx" else ("x", "z")
    circuit.extend(_device_ops(first, config, layout, layout.n_qubits))
    circuit.extend(_device_ops(second, config, layout, layout.n_qubits))
    if readout:
        circuit = attach_readout_rotations(circuit, layout.x_probes)
    return circuit


def _initial_state(config: ExperimentConfig, n_qubits: int, center: int) -> StateVector:
    return qubit_state(n_qubits, center, config.a, config.b)


def experiment_state(config: ExperimentConfig, layout: CrossLayout,
                     *, wigner: bool = False) -> StateVector:
    """Final pre-measurement state of the (unitary) sequential circuit."""
    circuit = build_experiment_circuit(config, layout, readout=not wigner)
    return apply_circuit(_initial_state(config, layout.n_qubits, layout.center), circuit)


def analytic_distribution(config: ExperimentConfig, layout: CrossLayout,
                          *, wigner: bool = False) -> dict[str, float]:
    """Exact full-register Born table; the oracle the sampled runs are
    checked against."""
    return born_probabilities(experiment_state(config, layout, wigner=wigner))


def _bit(key: str, qubit: int) -> str:
    return key[len(key) - 1 - qubit]


def decode_table(table: dict, layout: CrossLayout, *, x_rotated: bool,
                 with_parity: bool) -> dict:
    """Decode a counts or probability table keyed by full-register bitstrings.

    Returns the system-qubit marginal, collective votes, optional parity
    classification, and the joint tables used for order-comparison and
    parity conditioning. Every output table starts zero-filled so alphabets
    are complete.
    """
    qs = {"0": 0, "1": 0}
    z_col = {label: 0 for label in Z_LABELS}
    qs_z = {f"{s},{label}": 0 for s in "01" for label in Z_LABELS}
    x_col = {label: 0 for label in X_LABELS} if x_rotated else None
    qs_x = {f"{s},{label}": 0 for s in "01" for label in X_LABELS} if x_rotated else None
    par = {label: 0 for label in PARITY_LABELS} if with_parity else None
    qs_par = ({f"{s},{label}": 0 for s in "01" for label in PARITY_LABELS}
              if with_parity else None)

    for key, value in table.items():
        s = _bit(key, layout.center)
        z_bits = "".join(_bit(key, q) for q in layout.z_probes)
        x_bits = "".join(_bit(key, q) for q in layout.x_probes)
        z_label = decode_collective(z_bits, "z")
        qs[s] += value
        z_col[z_label] += value
        qs_z[f"{s},{z_label}"] += value
        if x_rotated:
            x_label = decode_collective(x_bits, "x")
            x_col[x_label] += value
            qs_x[f"{s},{x_label}"] += value
        if with_parity:
            p_label = parity_of(x_bits)
            par[p_label] += value
            qs_par[f"{s},{p_label}"] += value

    out = {"qs_marginal": qs, "z_collective": z_col, "qs_z_joint": qs_z,
           "x_collective": x_col, "qs_x_joint": qs_x,
           "parity": par, "qs_parity_joint": qs_par}
    return out


@dataclass
class ExperimentReport:
    """Sampled histogram plus decoded statistics for one experiment run."""

    raw: ShotHistogram
    qs_marginal: dict[str, int]
    z_collective: dict[str, int]
    x_collective: dict[str, int] | None
    parity: dict[str, int] | None
    conditional_tables: dict
    metadata: dict

    def to_dict(self) -> dict:
        return {
            "raw": self.raw.to_dict(),
            "qs_marginal": self.qs_marginal,
            "z_collective": self.z_collective,
            "x_collective": self.x_collective,
            "parity": self.parity,
            "conditional_tables": self.conditional_tables,
            "metadata": self.metadata,
        }

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text


def params_digest(params: ParamSet | None) -> str | None:
    if params is None:
        return None
    return hashlib.sha256(params.to_json().encode()).hexdigest()


def _metadata(config: ExperimentConfig, mode: str, **extra) -> dict:
    meta = {
        "mode": mode,
        "order": config.order,
        "n_probes_half": config.N,
        "layers": None if config.params is None else config.params.m,
        "shots": config.shots,
        "seed": config.seed,
        "input": {"a": [config.a.real, config.a.imag],
                  "b": [config.b.real, config.b.imag]},
        "source": config.source,
        "params_sha256": params_digest(config.params),
    }
    meta.update(extra)
    return meta


def _conditional_from_joint(joint: dict, outer_labels) -> dict:
    """P(system bit | outer label) as frequencies, skipping empty bins."""
    out = {}
    for label in outer_labels:
        total = joint[f"0,{label}"] + joint[f"1,{label}"]
        if total > 0:
            out[label] = {"0": joint[f"0,{label}"] / total,
                          "1": joint[f"1,{label}"] / total}
    return out


def run_sequential(config: ExperimentConfig, layout: CrossLayout) -> ExperimentReport:
    """Both devices in configured order, X-arm readout rotations attached,
    all qubits measured."""
    state = experiment_state(config, layout)
    rng = np.random.default_rng(config.seed)
    hist = sample_shots(state, config.shots, rng)
    decoded = decode_table(hist.counts, layout, x_rotated=True, with_parity=False)
    return ExperimentReport(
        raw=hist,
        qs_marginal=decoded["qs_marginal"],
        z_collective=decoded["z_collective"],
        x_collective=decoded["x_collective"],
        parity=None,
        conditional_tables={"qs_z_joint": decoded["qs_z_joint"],
                            "qs_x_joint": decoded["qs_x_joint"]},
        metadata=_metadata(config, "sequential"),
    )


def run_wigner(config: ExperimentConfig, layout: CrossLayout) -> ExperimentReport:
    """Interferometer mode: X device first, Z device second, readout rotations
    omitted so the X-arm parity selects the coherent branch."""
    if config.order != "xz":
        raise ValueError("the interferometer runs the X device first; use order='xz'")
    state = experiment_state(config, layout, wigner=True)
    rng = np.random.default_rng(config.seed)
    hist = sample_shots(state, config.shots, rng)
    decoded = decode_table(hist.counts, layout, x_rotated=False, with_parity=True)
    return ExperimentReport(
        raw=hist,
        qs_marginal=decoded["qs_marginal"],
        z_collective=decoded["z_collective"],
        x_collective=None,
        parity=decoded["parity"],
        conditional_tables={
            "qs_z_joint": decoded["qs_z_joint"],
            "qs_parity_joint": decoded["qs_parity_joint"],
            "qs_given_parity": _conditional_from_joint(decoded["qs_parity_joint"],
                                                       PARITY_LABELS),
        },
        metadata=_metadata(config, "wigner"),
    )


def _delayed_prefix(config: ExperimentConfig, layout: CrossLayout,
                    p_choice: float) -> tuple[Circuit, int]:
    """Ancilla preparation plus both devices (X first); readout handling is
    appended by the caller per mode."""
    n = layout.n_qubits + 1
    ancilla = layout.n_qubits
    circuit = Circuit(n, roles=layout.role_map(ancilla=ancilla))
    circuit.append(ry(ancilla, 2.0 * math.asin(math.sqrt(p_choice))))
    circuit.extend(_device_ops("x", config, layout, n))
    circuit.extend(_device_ops("z", config, layout, n))
    return circuit, ancilla


def delayed_choice_circuit(config: ExperimentConfig, layout: CrossLayout,
                           mode: str, p_choice: float) -> tuple[Circuit, int]:
    """Full delayed-choice program. midcircuit: collapse the ancilla after the
    second device and classically condition the readout rotations on it.
    deferred: controlled rotations from the ancilla, measured terminally."""
    if mode not in ("midcircuit", "deferred"):
        raise ValueError("mode must be 'midcircuit' or 'deferred'")
    if not 0.0 <= p_choice <= 1.0:
        raise ValueError("p_choice must lie in [0, 1]")
    circuit, ancilla = _delayed_prefix(config, layout, p_choice)
    if mode == "deferred":
        circuit.extend(cry(ancilla, q, READOUT_ANGLE) for q in layout.x_probes)
    else:
        circuit.append(measure(ancilla, cbit=0))
        circuit.extend(ry(q, READOUT_ANGLE, condition=(0, 1)) for q in layout.x_probes)
    return circuit, ancilla


_BRANCH_WEIGHT_FLOOR = 1e-15  # drops rounding dust from cos(pi/2) etc.


def delayed_branch_states(config: ExperimentConfig, layout: CrossLayout,
                          mode: str, p_choice: float) -> dict[int, tuple[float, StateVector]]:
    """Ancilla-resolved final states: {outcome: (weight, state)}. Branches of
    negligible weight are omitted. The ancilla qubit inside each state is
    collapsed to its outcome."""
    if mode not in ("midcircuit", "deferred"):
        raise ValueError("mode must be 'midcircuit' or 'deferred'")
    if not 0.0 <= p_choice <= 1.0:
        raise ValueError("p_choice must lie in [0, 1]")
    prefix, ancilla = _delayed_prefix(config, layout, p_choice)
    psi = apply_circuit(_initial_state(config, prefix.n_qubits, layout.center), prefix)
    if mode == "deferred":
        for q in layout.x_probes:
            psi = apply_gate(psi, cry(ancilla, q, READOUT_ANGLE))
    branches: dict[int, tuple[float, StateVector]] = {}
    for outcome in (0, 1):
        weight, state = project_qubit(psi, ancilla, outcome)
        if state is None or weight <= _BRANCH_WEIGHT_FLOOR:
            continue
        if mode == "midcircuit" and outcome == 1:
            for q in layout.x_probes:
                state = apply_gate(state, ry(q, READOUT_ANGLE))
        branches[outcome] = (weight, state)
    return branches


def delayed_branch_distributions(config: ExperimentConfig, layout: CrossLayout,
                                 mode: str, p_choice: float
                                 ) -> dict[int, tuple[float, dict[str, float]]]:
    """Analytic Born tables over the physical register, one per ancilla branch."""
    register = list(range(layout.n_qubits - 1, -1, -1))
    return {outcome: (weight, born_probabilities(state, register))
            for outcome, (weight, state)
            in delayed_branch_states(config, layout, mode, p_choice).items()}


def branch_equivalence_summary(config: ExperimentConfig, layout: CrossLayout,
                               p_choice: float) -> dict:
    """Compare the two delayed-choice formulations branch by branch."""
    mid = delayed_branch_distributions(config, layout, "midcircuit", p_choice)
    deferred = delayed_branch_distributions(config, layout, "deferred", p_choice)
    branches = {}
    max_tvd = 0.0
    max_weight_diff = 0.0
    for outcome in sorted(set(mid) | set(deferred)):
        w_mid, t_mid = mid.get(outcome, (0.0, {}))
        w_def, t_def = deferred.get(outcome, (0.0, {}))
        tvd = total_variation_distance(t_mid, t_def) if t_mid and t_def else 1.0
        branches[str(outcome)] = {"weight_midcircuit": w_mid,
                                  "weight_deferred": w_def, "tvd": tvd}
        max_tvd = max(max_tvd, tvd)
        max_weight_diff = max(max_weight_diff, abs(w_mid - w_def))
    return {"branches": branches, "max_branch_tvd": max_tvd,
            "max_weight_difference": max_weight_diff}


def _branch_report(counts: dict[str, int], layout: CrossLayout, outcome: int) -> dict:
    shots = sum(counts.values())
    decoded = decode_table(counts, layout, x_rotated=(outcome == 1),
                           with_parity=(outcome == 0))
    entry = {"shots": shots,
             "qs_marginal": decoded["qs_marginal"],
             "z_collective": decoded["z_collective"],
             "qs_z_joint": decoded["qs_z_joint"]}
    if outcome == 1:
        entry["x_collective"] = decoded["x_collective"]
        entry["qs_x_joint"] = decoded["qs_x_joint"]
    else:
        entry["parity"] = decoded["parity"]
        entry["qs_parity_joint"] = decoded["qs_parity_joint"]
        entry["qs_given_parity"] = _conditional_from_joint(
            decoded["qs_parity_joint"], PARITY_LABELS)
    return entry


def run_delayed_choice(config: ExperimentConfig, layout: CrossLayout,
                       mode: str = "midcircuit",
                       p_choice: float = 0.5) -> ExperimentReport:
    """Delayed-choice run: an ancilla decides (with probability p_choice)
    whether the X-arm readout rotations fire. Branch 1 reproduces the
    which-way statistics, branch 0 the interferometer statistics."""
    if config.order != "xz":
        raise ValueError("the delayed-choice experiment runs the X device first; "
                         "use order='xz'")
    branches = delayed_branch_states(config, layout, mode, p_choice)
    n_total = layout.n_qubits + 1
    rng = np.random.default_rng(config.seed)

    if mode == "deferred":
        # fully unitary program: sample its final state directly
        circuit, _ = delayed_choice_circuit(config, layout, mode, p_choice)
        state = apply_circuit(_initial_state(config, n_total, layout.center), circuit)
        hist = sample_shots(state, config.shots, rng)
    else:
        # the collapsed-ancilla branches are the only two trajectories, so
        # their weighted mixture is the exact shot distribution
        mixture = np.zeros(1 << n_total)
        for weight, state in branches.values():
            mixture += weight * np.abs(state.amplitudes) ** 2
        mixture /= mixture.sum()
        draws = rng.choice(1 << n_total, size=config.shots, p=mixture)
        hist = histogram_from_samples(draws, config.shots, n_total)

    ancilla = layout.n_qubits
    by_ancilla = {}
    for outcome in (0, 1):
        counts = {k: c for k, c in hist.counts.items() if _bit(k, ancilla) == str(outcome)}
        by_ancilla[str(outcome)] = _branch_report(counts, layout, outcome)

    decoded = decode_table(hist.counts, layout, x_rotated=False, with_parity=False)
    return ExperimentReport(
        raw=hist,
        qs_marginal=decoded["qs_marginal"],
        z_collective=decoded["z_collective"],
        x_collective=None,
        parity=None,
        conditional_tables={"qs_z_joint": decoded["qs_z_joint"],
                            "by_ancilla": by_ancilla},
        metadata=_metadata(config, f"delayed_{mode}", p_choice=p_choice,
                           ancilla=ancilla),
    )


def total_variation_distance(table_a, table_b) -> float:
    """Half the L1 distance between two distributions given as probability
    tables, count tables, or ShotHistograms. Missing keys count as zero;
    bitstring tables must agree on string length."""
    def as_freqs(table):
        if isinstance(table, ShotHistogram):
            table = table.counts
        total = float(sum(table.values()))
        if total <= 0.0:
            raise ValueError("cannot normalize an empty table")
        return {k: v / total for k, v in table.items()}

    def bitstring_lengths(freqs):
        if freqs and all(set(k) <= {"0", "1"} for k in freqs):
            return {len(k) for k in freqs}
        return None

    fa, fb = as_freqs(table_a), as_freqs(table_b)
    la, lb = bitstring_lengths(fa), bitstring_lengths(fb)
    if la is not None and lb is not None and la != lb:
        raise ValueError("tables are keyed by bitstrings of different lengths")
    keys = set(fa) | set(fb)
    return 0.5 * sum(abs(fa.get(k, 0.0) - fb.get(k, 0.0)) for k in keys)
