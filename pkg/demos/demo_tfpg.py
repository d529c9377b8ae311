"""Timed failure propagation graphs: admission, validation, synthesis.

Run from the repository root: python demos/demo_tfpg.py
"""

from pathlib import Path

from mbsa.faults import extend_model, load_fault_library, parse_fei
from mbsa.sts import parse_model, type_check
from mbsa.tfpg import (
    Tfpg,
    admits,
    parse_binding,
    parse_tfpg,
    synthesize_structure,
    tfpg_to_dot,
    validate_behavioral,
    write_tfpg,
)
from mbsa.tfpg.activation import ActivationTrace, activation_trace_of

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

graph = parse_tfpg((FIXTURES / "battery_sensor.tfpg").read_text())
print(f"=== graph: {len(graph.nodes)} nodes "
      f"({len(graph.failures())} failures), {len(graph.edges)} edges ===")
print(write_tfpg(graph))

print("=== trace admission ===")
times = {n: None for n in graph.nodes}
times.update({"G1_Off": 0, "G1_DEAD": 0, "B1_LOW": 7, "B1_DEAD": 12, "S1_NO": 12})
at = ActivationTrace(40, times, tuple(["P"] * 40))
print("generator-1 chain in primary mode:", admits(graph, at))

late = dict(times, B1_DEAD=30, S1_NO=30)
verdict = admits(graph, ActivationTrace(40, late, tuple(["P"] * 40)))
print("same chain with a 23-step drain:  ", verdict)

print("\n=== behavioral validation against the model ===")
nominal = type_check(parse_model((FIXTURES / "battery_sensor.smx").read_text()))
xm = extend_model(nominal, load_fault_library(),
                  parse_fei((FIXTURES / "battery_sensor.fei").read_text()))
binding = parse_binding((FIXTURES / "battery_sensor.bind").read_text(), xm)
report = validate_behavioral(graph, binding, xm, step_bound=60)
print("verdict:", report.verdict, f"({report.explored_states} product states)")

mutated = Tfpg(graph.modes, dict(graph.nodes),
               tuple(e for e in graph.edges if not (e.src == "B1_DEAD" and e.dst == "S2_NO")))
report = validate_behavioral(mutated, binding, xm, step_bound=60)
trace, inc = report.counterexamples[0]
print(f"without the crossfeed edge: {report.verdict};"
      f" first inconsistency {inc.node} ({inc.reason}) at step {inc.step}")
abstracted = activation_trace_of(trace, binding, xm)
print("counterexample activations:",
      {n: t for n, t in abstracted.times.items() if t is not None})

print("\n=== structure synthesis ===")
synthesized = synthesize_structure(xm, binding, step_bound=60)
recovered = {(e.src, e.dst) for e in synthesized.edges}
original = {(e.src, e.dst) for e in graph.edges}
print(f"synthesized {len(synthesized.edges)} edges;"
      f" equal to the hand-written structure: {recovered == original}")
print("\nDOT rendering of the synthesized graph starts with:")
print("\n".join(tfpg_to_dot(synthesized).splitlines()[:8]))
