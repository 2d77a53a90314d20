"""
SweepOperation - Evaluates a witness along a grid of one state or witness parameter.

Command format:
    SWEEP state_file=name parameter=sigma start=0 stop=0.2 points=21 [witness_file=name] [critical=True] [tol=1e-4]

Required arguments:
    state_file: State JSON (a path, or a file name in the library folder)
    parameter: sigma (noisy four-mode cat), xi (squeezing modulus, phase kept), kappa
               (photon subtraction) or radius (circular witness for a squeezed vacuum)
    start, stop, points: The evenly spaced grid

Optional arguments:
    witness_file: Witness JSON, required for every parameter except radius
    critical: Bisect the first sign change of the witness value instead of printing the rows
    tol: Final bracket width of the bisection (default: 1e-4)

Example:
    SWEEP state_file=fourmode_cat witness_file=fourmode_four_partition parameter=sigma start=0 stop=0.2 points=21 critical=True

Notes:
    - Rows are printed as CSV unless another --format is requested
    - A fixed witness is solved once and its bound reused along the grid
"""

import cmath
from dataclasses import replace

import numpy as np

import benchmark_configs
from optimizer import find_critical, sweep
from state_models import NoisyFourModeCat, PhotonSubtractedTmsv, Tmsv

from .IOperation import IOperation

PARAMETERS = {
    "sigma": (NoisyFourModeCat,),
    "xi": (Tmsv, PhotonSubtractedTmsv),
    "kappa": (PhotonSubtractedTmsv,),
    "radius": (Tmsv,),
}


def state_family(quantum_state, parameter):
    """Returns parameter value -> state for a state field, or the fixed state for a witness parameter."""
    if parameter == "radius":
        return quantum_state
    if parameter == "xi":
        phase = cmath.exp(1j * cmath.phase(quantum_state.xi)) if quantum_state.xi != 0 else 1.0
        return lambda value: replace(quantum_state, xi=complex(value) * phase)
    return lambda value: replace(quantum_state, **{parameter: float(value)})


class SweepOperation(IOperation):
    def __init__(self):
        super().__init__()
        self.state_file = None
        self.witness_file = None
        self.parameter = None
        self.grid = None
        self.critical = False
        self.tol = 1e-4
        self.sweep_result = None

    def validate_and_set_args(self, **args):
        """
        Validates and sets the arguments required for the sweep.

        Raises:
            ValueError: If an argument is missing or the grid is invalid
        """
        state_file = args.get("state_file")
        if not state_file:
            raise ValueError("SWEEP operation requires a state_file")
        self.state_file = self.resolve_input_path(state_file)
        self.parameter = args.get("parameter")
        if self.parameter not in PARAMETERS:
            raise ValueError(f"parameter must be one of {', '.join(PARAMETERS)}, got {self.parameter}")
        if self.parameter != "radius":
            if not args.get("witness_file"):
                raise ValueError(f"SWEEP over {self.parameter} requires a witness_file")
            self.witness_file = self.resolve_input_path(args["witness_file"])
        try:
            start, stop, points = float(args["start"]), float(args["stop"]), int(args["points"])
        except KeyError as e:
            raise ValueError(f"SWEEP operation requires {e.args[0]}")
        if points < 2 or stop <= start:
            raise ValueError(f"Invalid grid: start={start}, stop={stop}, points={points}")
        self.grid = [float(p) for p in np.linspace(start, stop, points)]
        self.critical = str(args.get("critical", False)).lower() == "true"
        self.tol = float(args.get("tol") or 1e-4)

    def get_operation_name(self):
        return "SWEEP"

    def get_operation_details(self):
        return {
            "state_file": self.state_file,
            "witness_file": self.witness_file,
            "parameter": self.parameter,
            "grid": [self.grid[0], self.grid[-1], len(self.grid)],
            "critical": self.critical,
        }

    def post_execute(self, state, result):
        output_format = state.get('format') or ("json" if self.critical else "csv")
        if self.critical or output_format != "csv":
            self.emit(state, self.format_result(result, output_format))
        else:
            self.emit(state, self.sweep_result.to_csv())

    def pre_execute(self, state):
        self.sweep_result = None

    def apply_operation(self, state, **kwargs):
        quantum_state = self.open_state(self.state_file)
        if not isinstance(quantum_state, PARAMETERS[self.parameter]):
            raise ValueError(f"Parameter {self.parameter} does not apply to a {type(quantum_state).__name__} state")
        family = state_family(quantum_state, self.parameter)
        if self.parameter == "radius":
            witness = lambda r: benchmark_configs.tmsv_circle_witness(r, quantum_state.xi)
        else:
            witness = self.open_witness(self.witness_file)
        if self.critical:
            value = find_critical(family, witness, self.grid, tol=self.tol, seed=state['seed'],
                                  threads=state['threads'])
            return {"parameter": self.parameter, "critical": value}
        self.sweep_result = sweep(family, witness, self.grid, seed=state['seed'], threads=state['threads'])
        return self.sweep_result.to_json()
