# Import the witness library
import sys
sys.path.append('./witness-library/python')
import json

import benchmark_configs
from measurement_sim import simulate
from state_models import state_to_json
from witness_core import apply_loss, evaluate, solve_sev

# Create the Bell-like state (1 - |eps|/2)|g,-g> + (eps/2)|-g,g>
state = benchmark_configs.bell_state(gamma=0.6)
print("State:")
print(json.dumps(state_to_json(state), indent=4))

# Create the three-row witness optimized for that state
witness = benchmark_configs.bell_witness(gamma=0.6)
print("Witness:")
print(json.dumps(witness.to_json(), indent=4))

# Solve the minimal separability eigenvalue; the bound does not depend on the state
solution = solve_sev(witness)
print("Separability bound:")
print(json.dumps(solution.to_json(), indent=4))

# Evaluate the witness: the state is entangled when <L> falls below g_min
report = evaluate(witness, state, solution=solution)
print("Evaluation:")
print(json.dumps(report.to_json(), indent=4))

# Simulate the displaced photon-counting measurement
estimate = simulate(witness, state, shots=100_000, seed=0)
print("Simulated measurement:")
print(json.dumps(estimate.to_json(), indent=4))

# Detectors with 80% efficiency: the same counts now measure a transformed witness with the same bound
lossy_witness = apply_loss(witness, [0.8, 0.8])
lossy_report = evaluate(lossy_witness, state)
print("Evaluation with 80% detection efficiency:")
print(json.dumps(lossy_report.to_json(), indent=4))
