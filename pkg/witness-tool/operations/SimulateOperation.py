"""
SimulateOperation - Monte Carlo estimate of <L> from simulated displaced photon counting.

Command format:
    SIMULATE witness_file=name state_file=name [shots=100000] [etas=0.9,0.8] [compensate=True]

Required arguments:
    witness_file: Witness JSON (a path, or a file name in the library folder)
    state_file: State JSON (a path, or a file name in the library folder)

Optional arguments:
    shots: Number of shots (default: 100000)
    etas: Per-mode detection efficiencies, comma separated (default: lossless)
    compensate: Set the displacements to sqrt(eta) * alpha at the detectors (default: False)

Example:
    SIMULATE witness_file=bell_witness state_file=bell shots=1000000

Notes:
    - --seed fixes the shot record, --threads sets the number of sampling streams
    - --cutoff overrides the automatic Fock truncation of the state
"""

from errors import ModelMismatch
from fock_oracle import FockCutoff
from measurement_sim import simulate
from witness_core import compensate_loss

from .IOperation import IOperation


def parse_etas(value):
    if value is None or value == "":
        return None
    if isinstance(value, str):
        return [float(v) for v in value.split(",")]
    return [float(v) for v in value]


class SimulateOperation(IOperation):
    def __init__(self):
        super().__init__()
        self.witness_file = None
        self.state_file = None
        self.shots = 100_000
        self.etas = None
        self.compensate = False

    def validate_and_set_args(self, **args):
        """
        Validates and sets the arguments required for the simulation.

        Raises:
            ValueError: If a file argument is missing or an option is invalid
        """
        self.witness_file = args.get("witness_file")
        self.state_file = args.get("state_file")
        if not self.witness_file or not self.state_file:
            raise ValueError("SIMULATE operation requires a witness_file and a state_file")
        self.witness_file = self.resolve_input_path(self.witness_file)
        self.state_file = self.resolve_input_path(self.state_file)
        self.shots = int(args.get("shots") or 100_000)
        if self.shots < 1:
            raise ValueError(f"shots must be at least 1, got {self.shots}")
        self.etas = parse_etas(args.get("etas"))
        self.compensate = str(args.get("compensate", False)).lower() == "true"
        if self.compensate and self.etas is None:
            raise ValueError("compensate requires etas")

    def get_operation_name(self):
        return "SIMULATE"

    def get_operation_details(self):
        return {
            "witness_file": self.witness_file,
            "state_file": self.state_file,
            "shots": self.shots,
            "etas": self.etas,
            "compensate": self.compensate,
        }

    def post_execute(self, state, result):
        self.emit_result(state, result)

    def pre_execute(self, state):
        return

    def apply_operation(self, state, **kwargs):
        witness = self.open_witness(self.witness_file)
        quantum_state = self.open_state(self.state_file)
        if witness.n_modes != quantum_state.n_modes:
            raise ModelMismatch(f"Witness has {witness.n_modes} modes but the state has {quantum_state.n_modes}")
        if self.compensate:
            witness = compensate_loss(witness, self.etas)
        cutoff = FockCutoff(state['cutoff']) if state.get('cutoff') else None
        estimate = simulate(witness, quantum_state, self.shots, seed=state['seed'], cutoff=cutoff,
                            etas=self.etas, workers=state['threads'])
        return estimate.to_json()
