"""
Logic minimization of the 1-bit submodules embedded in arithmetic circuits.

A submodule is a maximal group of ADD/MUL/MUL-CONST gates on 1-bit wires
connected producer to consumer. Each one is tabulated exhaustively, reduced to
prime implicants (Quine-McCluskey), covered minimally (Petrick's method) and
rebuilt from AND/OR/NOT gadgets. The rebuilt version replaces the original only
when it is strictly smaller and its truth table is identical.
"""

from __future__ import annotations

import heapq
import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from app.models.circuit import Circuit, Gate
from app.models.minimizer import (
    Implicant,
    LogicSubmodule,
    MinimizationReport,
    PetrickExpression,
    PetrickResult,
    Strategy,
    SubmoduleReport,
)
from app.services.circuit import apply_gate, wire_widths
from app.services.errors import EmptyChart, MinimizerError, TooManyVariables
from app.services.scheduler import schedule


logger = logging.getLogger(__name__)

LOGIC_KINDS = ("ADD", "MUL", "MUL-CONST")
MAX_VARIABLES = 16

Cube = Tuple[int, ...]
Product = FrozenSet[str]


# -- circuit analysis -------------------------------------------------------

def constant_wires(circuit: Circuit) -> Dict[int, int]:
    """Wires whose value does not depend on the inputs."""
    values: Dict[int, int] = {}
    for gate in circuit.gates:
        if gate.kind == "ZERO":
            values[gate.outputs[0]] = 0
        elif all(wire in values for wire in gate.inputs):
            values.update(zip(gate.outputs, apply_gate(gate, values, circuit.field_modulus)))
    return values


def extract_submodules(circuit: Circuit, max_inputs: int = MAX_VARIABLES) -> List[LogicSubmodule]:
    widths = wire_widths(circuit)
    constants = constant_wires(circuit)
    producer: Dict[int, int] = {}
    logic: List[int] = []
    for index, gate in enumerate(circuit.gates):
        for wire in gate.outputs:
            producer[wire] = index
        if (
            gate.kind in LOGIC_KINDS
            and widths[gate.outputs[0]] == 1
            and all(widths[wire] == 1 for wire in gate.inputs)
            and gate.outputs[0] not in constants
        ):
            logic.append(index)
    logic_set = set(logic)

    parent = {index: index for index in logic}

    def find(index: int) -> int:
        while parent[index] != index:
            parent[index] = parent[parent[index]]
            index = parent[index]
        return index

    for index in logic:
        for wire in circuit.gates[index].inputs:
            source = producer.get(wire)
            if source in logic_set:
                parent[find(source)] = find(index)

    components: Dict[int, List[int]] = defaultdict(list)
    for index in logic:
        components[find(index)].append(index)

    consumers: Dict[int, Set[int]] = defaultdict(set)
    for index, gate in enumerate(circuit.gates):
        for wire in gate.inputs:
            consumers[wire].add(index)
    circuit_outputs = set(circuit.output_wires)

    submodules = []
    for sub_id, members in enumerate(sorted(components.values(), key=min)):
        member_set = set(members)
        produced = {wire for index in members for wire in circuit.gates[index].outputs}
        boundary_inputs: List[int] = []
        for index in members:
            for wire in circuit.gates[index].inputs:
                if wire not in produced and wire not in constants and wire not in boundary_inputs:
                    boundary_inputs.append(wire)
        boundary_outputs = [
            wire for index in members for wire in circuit.gates[index].outputs
            if wire in circuit_outputs or consumers[wire] - member_set
        ]
        reason = None
        if len(boundary_inputs) > max_inputs:
            reason = f"{len(boundary_inputs)} boundary inputs exceed the limit of {max_inputs}"
        elif not boundary_outputs:
            reason = "no boundary outputs"
        submodules.append(LogicSubmodule(
            id=sub_id,
            gates=members,
            boundary_inputs=boundary_inputs,
            boundary_outputs=boundary_outputs,
            g=len(members),
            minimizable=reason is None,
            reason=reason,
        ))
    logger.info("found %d logic submodules (%d gates)", len(submodules), len(logic))
    return submodules


def _signed(value: int, p: int) -> int:
    return value - p if value > p // 2 else value


def truth_tables(gates: Sequence[Gate], inputs: Sequence[int], outputs: Sequence[int],
                 constants: Mapping[int, int], p: int) -> np.ndarray:
    """Evaluate gates on all 2^m input rows; variable 0 is the most significant index bit."""
    m = len(inputs)
    rows = np.arange(1 << m, dtype=np.int64)
    values = {wire: (rows >> (m - 1 - i)) & 1 for i, wire in enumerate(inputs)}

    def value(wire: int) -> np.ndarray:
        if wire in values:
            return values[wire]
        return np.full(rows.shape, _signed(constants[wire], p), dtype=np.int64)

    for gate in gates:
        args = [value(wire) for wire in gate.inputs]
        if gate.kind == "ADD":
            values[gate.outputs[0]] = args[0] + args[1]
        elif gate.kind == "MUL":
            values[gate.outputs[0]] = args[0] * args[1]
        elif gate.kind == "MUL-CONST":
            values[gate.outputs[0]] = args[0] * _signed(gate.const, p)
        else:
            raise MinimizerError(f"{gate.kind} gate inside a logic submodule")
    if not outputs:
        return np.zeros((0, rows.size), dtype=np.int64)
    return np.stack([value(wire) for wire in outputs])


# -- Quine-McCluskey --------------------------------------------------------

def minterms_of(pattern: Cube) -> FrozenSet[int]:
    slots = [(0, 1) if trit == 2 else (trit,) for trit in pattern]
    return frozenset(int("".join(map(str, bits)) or "0", 2) for bits in product(*slots))


def _mergeable(a: Cube, b: Cube) -> bool:
    diff = 0
    for x, y in zip(a, b):
        if x != y:
            if x == 2 or y == 2:
                return False
            diff += 1
    return diff == 1


def quine_mccluskey(truth_table: Sequence[int]) -> List[Implicant]:
    """All prime implicants of the function given by its truth table."""
    size = len(truth_table)
    if size == 0 or size & (size - 1):
        raise MinimizerError(f"truth table length {size} is not a power of two")
    n = size.bit_length() - 1
    if n > MAX_VARIABLES:
        raise TooManyVariables(f"{n} variables exceed the limit of {MAX_VARIABLES}")
    on = [index for index, bit in enumerate(truth_table) if int(bit) == 1]
    level: Dict[int, Set[Cube]] = defaultdict(set)
    for index in on:
        cube = tuple((index >> (n - 1 - i)) & 1 for i in range(n))
        level[sum(cube)].add(cube)

    primes: Set[Cube] = set()
    while level:
        used: Set[Cube] = set()
        next_level: Dict[int, Set[Cube]] = defaultdict(set)
        for ones in sorted(level):
            for a in level[ones]:
                for b in level.get(ones + 1, ()):
                    if _mergeable(a, b):
                        merged = tuple(2 if x != y else x for x, y in zip(a, b))
                        next_level[ones].add(merged)
                        used.update((a, b))
        for cubes in level.values():
            primes.update(cube for cube in cubes if cube not in used)
        level = next_level
    return [Implicant(pattern=cube, covered_minterms=minterms_of(cube)) for cube in sorted(primes)]


# -- Petrick's method -------------------------------------------------------

def _absorb(products: Iterable[Product]) -> FrozenSet[Product]:
    """Drop every product that contains another one."""
    ordered = sorted(set(products), key=lambda prod: (len(prod), sorted(prod)))
    kept: List[Product] = []
    for prod in ordered:
        if not any(other <= prod for other in kept):
            kept.append(prod)
    return frozenset(kept)


def _combine(left: FrozenSet[Product], right: FrozenSet[Product]) -> Optional[FrozenSet[Product]]:
    """Absorption or distribution applied to a pair of factors, or None."""
    # (1) u(u + v) = u
    if left <= right:
        return left
    if right <= left:
        return right
    # (2) (u + v)(u + w) = u + vw
    common = left & right
    if common:
        crossed = {a | b for a in left - common for b in right - common}
        return _absorb(common | crossed)
    return None


def petrick_reduce(chart: PetrickExpression) -> PetrickResult:
    """
    Minimum cover of a product of sums.

    Factors are compared pairwise left to right, each pair at most once,
    merging through absorption and the distributive rule; the residual product is
    expanded and the smallest term wins (lexicographically smallest on ties).
    """
    if not chart.sums or any(not labels for labels in chart.sums):
        raise EmptyChart("Petrick chart has no sums or an empty sum")
    m = len(chart.sums)
    factors: List[Optional[FrozenSet[Product]]] = [
        _absorb(frozenset({label}) for label in labels) for labels in chart.sums
    ]
    steps = 0
    for i in range(m):
        for j in range(i + 1, m):
            if factors[i] is None or factors[j] is None:
                continue
            steps += 1
            merged = _combine(factors[i], factors[j])
            if merged is not None:
                factors[i], factors[j] = merged, None

    expansion: FrozenSet[Product] = frozenset({frozenset()})
    for factor in factors:
        if factor is not None:
            expansion = _absorb(a | b for a in expansion for b in factor)
    best = min(expansion, key=lambda prod: (len(prod), sorted(prod)))
    bound = m * (m - 1) // 2
    logger.debug("Petrick: %d sums, %d steps (bound %d), cover %s", m, steps, bound, sorted(best))
    return PetrickResult(cover=sorted(best), steps=steps, bound=bound)


def minimal_cover(truth_table: Sequence[int]) -> Tuple[List[Cube], int, int]:
    """Cover patterns, Petrick steps and step bound for one output."""
    primes = quine_mccluskey(truth_table)
    on = [index for index, bit in enumerate(truth_table) if int(bit) == 1]
    if not on:
        return [], 0, 0
    by_label = {prime.label: prime for prime in primes}
    chart = PetrickExpression(sums=[
        frozenset(prime.label for prime in primes if minterm in prime.covered_minterms) for minterm in on
    ])
    result = petrick_reduce(chart)
    return [by_label[label].pattern for label in result.cover], result.steps, result.bound


# -- resynthesis ------------------------------------------------------------

class _LocalBuilder:
    """Gate list over negative local wire ids."""

    def __init__(self, zero: int, one: int, p: int):
        self.zero, self.one, self.p = zero, one, p
        self.gates: List[Gate] = []
        self._next = -1
        self._nots: Dict[int, int] = {}
        self._products: Dict[Tuple[int, ...], int] = {}

    def gate(self, kind: str, inputs: List[int], const: Optional[int] = None) -> int:
        wire = self._next
        self._next -= 1
        self.gates.append(Gate(kind=kind, inputs=inputs, outputs=[wire], const=const))
        return wire

    def negate(self, wire: int) -> int:
        if wire not in self._nots:
            minus = self.gate("MUL-CONST", [wire], const=self.p - 1)
            self._nots[wire] = self.gate("ADD", [minus, self.one])
        return self._nots[wire]

    def conjunction(self, literals: List[int]) -> int:
        if not literals:
            return self.one
        key = tuple(literals)
        if key not in self._products:
            result = literals[0]
            for literal in literals[1:]:
                result = self.gate("MUL", [result, literal])
            self._products[key] = result
        return self._products[key]

    def disjunction(self, terms: List[int]) -> int:
        if not terms:
            return self.zero
        result = terms[0]
        for term in terms[1:]:
            total = self.gate("ADD", [result, term])
            both = self.gate("MUL", [result, term])
            scaled = self.gate("MUL-CONST", [both], const=self.p - 1)
            result = self.gate("ADD", [total, scaled])
        return result


def resynthesize(sub: LogicSubmodule, covers: Sequence[Sequence[Cube]], zero: int, one: int,
                 p: int) -> Tuple[List[Gate], Dict[int, int]]:
    """
    Sum-of-products realization of per-output covers.

    Returns gates over negative local wire ids and the wire now carrying each
    boundary output (a local wire, a boundary input, or the zero/one wire).
    """
    builder = _LocalBuilder(zero, one, p)
    output_map: Dict[int, int] = {}
    for wire, cover in zip(sub.boundary_outputs, covers):
        terms = []
        for pattern in cover:
            literals = [
                sub.boundary_inputs[i] if trit == 1 else builder.negate(sub.boundary_inputs[i])
                for i, trit in enumerate(pattern) if trit != 2
            ]
            terms.append(builder.conjunction(literals))
        output_map[wire] = one if one in terms else builder.disjunction(terms)
    return builder.gates, output_map


# -- jobs -------------------------------------------------------------------

@dataclass
class MinimizeJob:
    sub: LogicSubmodule
    gates: List[Gate]
    constants: Dict[int, int]
    zero: Optional[int]
    one: Optional[int]
    p: int
    circuit_outputs: Set[int] = field(default_factory=set)


@dataclass
class JobResult:
    report: SubmoduleReport
    gates: List[Gate] = field(default_factory=list)
    output_map: Dict[int, int] = field(default_factory=dict)


def run_job(job: MinimizeJob) -> JobResult:
    """Minimize one submodule; pure so it can run in a worker process."""
    sub = job.sub
    report = SubmoduleReport(
        id=sub.id,
        boundary_inputs=len(sub.boundary_inputs),
        boundary_outputs=len(sub.boundary_outputs),
        original_gates=sub.g,
        minimized_gates=sub.g,
    )
    if not sub.minimizable:
        report.skipped_reason = sub.reason
        return JobResult(report)
    if job.zero is None or job.one is None:
        report.skipped_reason = "circuit has no zero/one constant wires"
        return JobResult(report)

    original = truth_tables(job.gates, sub.boundary_inputs, sub.boundary_outputs, job.constants, job.p)
    if not np.all((original == 0) | (original == 1)):
        report.skipped_reason = "boundary output leaves {0, 1}"
        return JobResult(report)

    covers = []
    for row in original:
        cover, steps, bound = minimal_cover(row.tolist())
        covers.append(cover)
        report.petrick_steps += steps
        report.petrick_bound += bound
    gates, output_map = resynthesize(sub, covers, job.zero, job.one, job.p)

    constants = dict(job.constants)
    constants.update({job.zero: 0, job.one: 1})
    rebuilt = truth_tables(gates, sub.boundary_inputs, [output_map[w] for w in sub.boundary_outputs], constants, job.p)
    if not np.array_equal(original, rebuilt):
        logger.warning("submodule %d: rebuilt truth table differs, keeping the original", sub.id)
        report.skipped_reason = "rebuilt truth table differs"
        return JobResult(report)

    bound_outputs: Set[int] = set()
    bindings = 0
    for wire in sub.boundary_outputs:
        if wire not in job.circuit_outputs:
            continue
        target = output_map[wire]
        if target >= 0 or target in bound_outputs:
            bindings += 1
        bound_outputs.add(target)
    size = len(gates) + bindings
    if size >= sub.g:
        report.skipped_reason = f"no gain ({size} gates vs {sub.g})"
        return JobResult(report)
    report.minimized_gates = size
    report.replaced = True
    return JobResult(report, gates, output_map)


def _run_batch(jobs: List[MinimizeJob]) -> List[JobResult]:
    return [run_job(job) for job in jobs]


# -- assembly ---------------------------------------------------------------

def _assemble(circuit: Circuit, results: Sequence[Tuple[LogicSubmodule, JobResult]], zero: Optional[int]) -> Circuit:
    """Splice replacements in, re-sort topologically and renumber wires densely."""
    removed: Set[int] = set()
    remap: Dict[int, int] = {}
    entries: List[Tuple[Tuple[int, int], Gate]] = []
    fresh = circuit.num_wires

    for sub, result in results:
        removed.update(sub.gates)
        local: Dict[int, int] = {}
        anchor = min(sub.gates)
        for seq, gate in enumerate(result.gates):
            for wire in gate.outputs:
                local[wire] = fresh
                fresh += 1
            entries.append(((anchor, seq + 1), Gate(
                kind=gate.kind,
                inputs=[local.get(wire, wire) for wire in gate.inputs],
                outputs=[local[wire] for wire in gate.outputs],
                const=gate.const,
            )))
        for wire, target in result.output_map.items():
            remap[wire] = local.get(target, target)

    for index, gate in enumerate(circuit.gates):
        if index not in removed:
            entries.append(((index, 0), gate.model_copy(update={"inputs": [remap.get(w, w) for w in gate.inputs]})))

    outputs: List[int] = []
    fresh_replacements = {gate.outputs[0] for key, gate in entries if key[1] > 0}
    for wire in circuit.output_wires:
        target = remap.get(wire, wire)
        if wire in remap and (target not in fresh_replacements or target in outputs):
            binding = Gate(kind="ADD", inputs=[target, zero], outputs=[fresh])
            entries.append(((len(circuit.gates), len(outputs)), binding))
            target = fresh
            fresh += 1
        outputs.append(target)

    # stable Kahn sort keyed by original position
    producer = {wire: i for i, (_, gate) in enumerate(entries) for wire in gate.outputs}
    pending = [0] * len(entries)
    dependants: Dict[int, List[int]] = defaultdict(list)
    for i, (_, gate) in enumerate(entries):
        for wire in set(gate.inputs):
            if wire in producer:
                pending[i] += 1
                dependants[producer[wire]].append(i)
    heap = [(entries[i][0], i) for i in range(len(entries)) if pending[i] == 0]
    heapq.heapify(heap)
    ordered: List[Gate] = []
    while heap:
        _, i = heapq.heappop(heap)
        ordered.append(entries[i][1])
        for j in dependants[i]:
            pending[j] -= 1
            if pending[j] == 0:
                heapq.heappush(heap, (entries[j][0], j))
    if len(ordered) != len(entries):
        raise MinimizerError("replacement introduced a cycle")

    renumber: Dict[int, int] = {}
    for wire in circuit.input_wires:
        renumber[wire] = len(renumber)
    for gate in ordered:
        for wire in gate.outputs:
            renumber[wire] = len(renumber)
    gates = [
        gate.model_copy(update={
            "inputs": [renumber[w] for w in gate.inputs],
            "outputs": [renumber[w] for w in gate.outputs],
        })
        for gate in ordered
    ]
    signed = {remap.get(w, w) for w in circuit.signed_wires if w in circuit.input_wires}
    signed.update(new for old, new in zip(circuit.output_wires, outputs) if old in circuit.signed_wires)
    return Circuit(
        bit_width=circuit.bit_width,
        field_modulus=circuit.field_modulus,
        gates=gates,
        input_wires=[renumber[w] for w in circuit.input_wires],
        output_wires=[renumber[w] for w in outputs],
        signed_wires=sorted(renumber[w] for w in signed),
    )


def minimize_with_report(circuit: Circuit, cores: int = 1, strategy: Strategy = "lpt",
                         max_inputs: int = MAX_VARIABLES) -> Tuple[Circuit, MinimizationReport]:
    submodules = extract_submodules(circuit, max_inputs)
    state = schedule([(sub.id, sub.g) for sub in submodules], cores, strategy)
    constants = constant_wires(circuit)
    zero = next((g.outputs[0] for g in circuit.gates if g.kind == "ZERO"), None)
    one = next((g.outputs[0] for g in circuit.gates if g.kind == "ONE"), None)
    jobs = {
        sub.id: MinimizeJob(
            sub=sub,
            gates=[circuit.gates[index] for index in sub.gates],
            constants={wire: value for wire, value in constants.items()
                       if any(wire in circuit.gates[index].inputs for index in sub.gates)},
            zero=zero,
            one=one,
            p=circuit.field_modulus,
            circuit_outputs=set(circuit.output_wires),
        )
        for sub in submodules
    }

    results: Dict[int, JobResult] = {}
    batches = [[jobs[job_id] for job_id in core_jobs] for core_jobs in state.lists if core_jobs]
    if cores > 1 and len(batches) > 1:
        with ProcessPoolExecutor(max_workers=cores) as pool:
            for batch_results in pool.map(_run_batch, batches):
                results.update((result.report.id, result) for result in batch_results)
    else:
        for batch in batches:
            results.update((result.report.id, result) for result in _run_batch(batch))

    replaced = [(sub, results[sub.id]) for sub in submodules if results[sub.id].report.replaced]
    minimized = _assemble(circuit, replaced, zero) if replaced else circuit
    report = MinimizationReport(
        submodules=[results[sub.id].report for sub in submodules],
        schedule=state,
        gates_before=len(circuit.gates),
        gates_after=len(minimized.gates),
    )
    logger.info(
        "minimized %d of %d submodules: %d -> %d gates",
        len(replaced), len(submodules), report.gates_before, report.gates_after,
    )
    return minimized, report


def minimize(circuit: Circuit, cores: int = 1, strategy: Strategy = "lpt",
             max_inputs: int = MAX_VARIABLES) -> Circuit:
    return minimize_with_report(circuit, cores, strategy, max_inputs)[0]


def format_report(report: MinimizationReport) -> str:
    lines = [
        f"gates {report.gates_before} -> {report.gates_after}",
        f"schedule {report.schedule.strategy} cores {report.schedule.cores} makespan {report.schedule.makespan}",
    ]
    for core, (jobs, total) in enumerate(zip(report.schedule.lists, report.schedule.aggregates)):
        lines.append(f"core {core} load {total} jobs {' '.join(map(str, jobs)) or '-'}")
    for sub in report.submodules:
        status = "replaced" if sub.replaced else f"kept ({sub.skipped_reason})"
        lines.append(
            f"submodule {sub.id} in {sub.boundary_inputs} out {sub.boundary_outputs} "
            f"gates {sub.original_gates} -> {sub.minimized_gates} "
            f"steps {sub.petrick_steps}/{sub.petrick_bound} {status}"
        )
    lines.append(f"total steps {report.total_steps}")
    return "\n".join(lines) + "\n"
