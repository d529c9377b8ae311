"""Walk through automatic model extension on the battery-sensor system.

Run from the repository root: python demos/demo_extension.py
"""

from pathlib import Path

from mbsa.faults import extend_model, load_fault_library, parse_fei
from mbsa.sts import initial_states, parse_expr_text, parse_model, print_model, reach, type_check

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

print("=== nominal model ===")
nominal = type_check(parse_model((FIXTURES / "battery_sensor.smx").read_text()))
print(f"{len(nominal.model.variables)} variables:",
      ", ".join(n for n, _ in nominal.model.variables))
print(f"{len(initial_states(nominal))} initial state(s)")

target = nominal.check_expr(parse_expr_text("sys_dead"))
print("nominal system dies:", "yes" if reach(nominal, target) else "never")

print("\n=== fault library ===")
library = load_fault_library()
print("templates:", ", ".join(sorted(library.templates)))
print("dynamics: ", ", ".join(sorted(library.dynamics)))

print("\n=== extension ===")
instructions = parse_fei((FIXTURES / "battery_sensor.fei").read_text())
for ins in instructions:
    print(f"  {ins.event}: {ins.template} on {ins.target}, {ins.dynamics}, p={float(ins.probability)}")
extended = extend_model(nominal, library, instructions)
print(f"extended model has {len(extended.model.variables)} variables "
      f"and {len(extended.events)} registered events")

print("\nthe extension is expressible in the model language itself:")
print("\n".join(print_model(extended.model).splitlines()[:14]))
print("  ...")

target = extended.typed.check_expr(parse_expr_text("sys_dead"))
witness = reach(extended.typed, target)
print(f"\nwith faults enabled the system can die; shortest witness: {len(witness)} states")
final = witness.states[-1]
print("faults in the final state:",
      ", ".join(n for n, info in extended.events.items()
                if final[info.mode_var] == "faulty"))
