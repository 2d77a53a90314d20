"""
EvalOperation - Tests a state with a witness.

Command format:
    EVAL witness_file=name state_file=name [n_starts=64]

Required arguments:
    witness_file: Witness JSON (a path, or a file name in the library folder)
    state_file: State JSON (a path, or a file name in the library folder)

Optional arguments:
    n_starts: Starting points of the separability solver (default: 64)

Example:
    EVAL witness_file=bell_witness state_file=bell

Notes:
    - Prints the evaluation report: expectation, g_min, witness_value, entangled, margin_relative
    - The witness and the state must have the same number of modes
"""

from errors import ModelMismatch
from witness_core import evaluate

from .IOperation import IOperation


class EvalOperation(IOperation):
    def __init__(self):
        super().__init__()
        self.witness_file = None
        self.state_file = None
        self.n_starts = 64

    def validate_and_set_args(self, **args):
        """
        Validates and sets the arguments required for the evaluation.

        Args:
            **args: Keyword arguments containing the operation parameters

        Raises:
            ValueError: If a file argument is missing or the file doesn't exist
        """
        self.witness_file = args.get("witness_file")
        self.state_file = args.get("state_file")
        if not self.witness_file or not self.state_file:
            raise ValueError("EVAL operation requires a witness_file and a state_file")
        self.witness_file = self.resolve_input_path(self.witness_file)
        self.state_file = self.resolve_input_path(self.state_file)
        self.n_starts = int(args.get("n_starts") or 64)
        if self.n_starts < 1:
            raise ValueError(f"n_starts must be at least 1, got {self.n_starts}")

    def get_operation_name(self):
        return "EVAL"

    def get_operation_details(self):
        return {
            "witness_file": self.witness_file,
            "state_file": self.state_file,
            "n_starts": self.n_starts,
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
        report = evaluate(witness, quantum_state, n_starts=self.n_starts, seed=state['seed'])
        return report.to_json()
