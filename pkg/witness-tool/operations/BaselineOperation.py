"""
BaselineOperation - Simon and Duan covariance criteria for a two-mode state.

Command format:
    BASELINE state_file=name [criterion=both]
    BASELINE scan=True [gamma=0.6] [radii=11] [angles=24]

Required arguments:
    state_file: Two-mode state JSON, unless scan is set

Optional arguments:
    criterion: simon, duan or both (default: both)
    scan: Evaluate both criteria for the Bell-like state over the epsilon unit disk
    gamma: Coherent amplitude of the scanned state (default: 0.6)
    radii, angles: Grid points in |epsilon| (on (0, 1]) and arg(epsilon) (on [0, 2 pi))

Example:
    BASELINE state_file=tmsv
    BASELINE scan=True radii=5 angles=8

Notes:
    - Negative values flag entanglement
    - --cutoff overrides the automatic Fock truncation used for the covariance matrix
"""

import numpy as np

from baselines import Criterion, duan_criterion, epsilon_disk_scan, simon_criterion, state_covariance
from fock_oracle import FockCutoff

from .IOperation import IOperation

CRITERIA = ("simon", "duan", "both")


class BaselineOperation(IOperation):
    def __init__(self):
        super().__init__()
        self.state_file = None
        self.criterion = "both"
        self.scan = False
        self.gamma = 0.6
        self.radii = 11
        self.angles = 24

    def validate_and_set_args(self, **args):
        """
        Validates and sets the arguments required for the baseline criteria.

        Raises:
            ValueError: If neither a state file nor a scan is requested, or an option is invalid
        """
        self.scan = str(args.get("scan", False)).lower() == "true"
        if not self.scan:
            state_file = args.get("state_file")
            if not state_file:
                raise ValueError("BASELINE operation requires a state_file or scan=True")
            self.state_file = self.resolve_input_path(state_file)
        self.criterion = args.get("criterion") or "both"
        if self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {', '.join(CRITERIA)}, got {self.criterion}")
        self.gamma = float(args.get("gamma") or 0.6)
        self.radii = int(args.get("radii") or 11)
        self.angles = int(args.get("angles") or 24)
        if self.radii < 1 or self.angles < 1:
            raise ValueError("radii and angles must be at least 1")

    def get_operation_name(self):
        return "BASELINE"

    def get_operation_details(self):
        if self.scan:
            return {"scan": True, "gamma": self.gamma, "radii": self.radii, "angles": self.angles}
        return {"state_file": self.state_file, "criterion": self.criterion}

    def post_execute(self, state, result):
        self.emit_result(state, result, default_format="csv" if self.scan else "json")

    def pre_execute(self, state):
        return

    def apply_operation(self, state, **kwargs):
        cutoff = FockCutoff(state['cutoff']) if state.get('cutoff') else None
        if self.scan:
            radii = np.linspace(1.0 / self.radii, 1.0, self.radii)
            angles = np.linspace(0.0, 2 * np.pi, self.angles, endpoint=False)
            return epsilon_disk_scan(self.gamma, radii, angles, cutoff=cutoff)
        cov = state_covariance(self.open_state(self.state_file), cutoff)
        results = []
        if self.criterion in (Criterion.SIMON.value, "both"):
            results.append(simon_criterion(cov).to_json())
        if self.criterion in (Criterion.DUAN.value, "both"):
            results.append(duan_criterion(cov).to_json())
        return results
