"""
SevOperation - Solves the separability eigenvalue problem of a witness.

Command format:
    SEV witness_file=name [method=auto] [n_starts=64] [mu=1] [nu=0]

Required arguments:
    witness_file: Witness JSON (a path, or a file name in the library folder)

Optional arguments:
    method: auto, multistart or quintic (default: auto)
    n_starts: Starting points of the multistart solver (default: 64)
    mu, nu: Report the bound of mu * L + nu as well (mu > 0)

Example:
    SEV witness_file=tmsv_witness method=multistart

Notes:
    - auto uses the exact quintic for collinear two-mode witnesses with three displacements
    - quintic fails on witnesses that are not collinear
"""

from witness_core import affine_rescale, solve_sev, solve_sev_collinear_m3, solve_sev_multistart

from .IOperation import IOperation

METHODS = ("auto", "multistart", "quintic")


class SevOperation(IOperation):
    def __init__(self):
        super().__init__()
        self.witness_file = None
        self.method = "auto"
        self.n_starts = 64
        self.mu = None
        self.nu = None

    def validate_and_set_args(self, **args):
        """
        Validates and sets the arguments required for the separability solve.

        Raises:
            ValueError: If the witness file is missing or an option is invalid
        """
        witness_file = args.get("witness_file")
        if not witness_file:
            raise ValueError("SEV operation requires a witness_file")
        self.witness_file = self.resolve_input_path(witness_file)
        self.method = args.get("method") or "auto"
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {', '.join(METHODS)}, got {self.method}")
        self.n_starts = int(args.get("n_starts") or 64)
        if self.n_starts < 1:
            raise ValueError(f"n_starts must be at least 1, got {self.n_starts}")
        mu, nu = args.get("mu"), args.get("nu")
        if mu is not None or nu is not None:
            self.mu = float(mu) if mu is not None else 1.0
            self.nu = float(nu) if nu is not None else 0.0

    def get_operation_name(self):
        return "SEV"

    def get_operation_details(self):
        return {
            "witness_file": self.witness_file,
            "method": self.method,
            "n_starts": self.n_starts,
            "mu": self.mu,
            "nu": self.nu,
        }

    def post_execute(self, state, result):
        self.emit_result(state, result)

    def pre_execute(self, state):
        return

    def apply_operation(self, state, **kwargs):
        witness = self.open_witness(self.witness_file)
        if self.method == "quintic":
            solution = solve_sev_collinear_m3(witness, seed=state['seed'])
        elif self.method == "multistart":
            solution = solve_sev_multistart(witness, n_starts=self.n_starts, seed=state['seed'])
        else:
            solution = solve_sev(witness, n_starts=self.n_starts, seed=state['seed'])
        result = solution.to_json()
        if self.mu is not None:
            result["rescaled_g_min"] = affine_rescale(solution.g_min, self.mu, self.nu)
        return result
