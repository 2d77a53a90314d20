"""
OptimizeOperation - Searches witness parameters for a state with the genetic algorithm.

Command format:
    OPTIMIZE state_file=name [partition={1}:{2}] [m=3] [config_file=name] [initial_witness_file=name]

Required arguments:
    state_file: State JSON (a path, or a file name in the library folder)

Optional arguments:
    partition: Blocks of 1-based mode labels separated by ':' (default: one block per mode)
    m: Number of displacement rows (default: 3)
    config_file: GA config JSON whose keys mirror GaConfig (default: built-in defaults)
    initial_witness_file: Witness placed in the initial population

Example:
    OPTIMIZE state_file=bell partition={1}:{2} m=3 config_file=ga_config

Notes:
    - The run seed and thread count override the config file
    - Prints the best witness (in witness JSON form), its report and the best fitness per generation
"""

import json
from dataclasses import replace

from optimizer import GaConfig, ga_optimize
from witness_core import PartitionSpec

from .IOperation import IOperation


def parse_partition(value, n_modes):
    """
    Reads a partition given as "{1}:{2,3}", "1:2,3" or a list of 1-based label lists.

    Args:
        value: The partition argument, None for one block per mode
        n_modes (int): Modes of the state

    Returns:
        PartitionSpec: The partition
    """
    if value is None:
        return PartitionSpec.singletons(n_modes)
    if isinstance(value, str):
        try:
            blocks = [[int(label) for label in part.strip().strip("{}").split(",")] for part in value.split(":")]
        except ValueError:
            raise ValueError(f"Invalid partition '{value}', expected blocks like {{1}}:{{2,3}}")
    else:
        blocks = value
    partition = PartitionSpec.from_labels(blocks)
    if partition.n_modes != n_modes:
        raise ValueError(f"Partition covers {partition.n_modes} modes but the state has {n_modes}")
    return partition


class OptimizeOperation(IOperation):
    def __init__(self):
        super().__init__()
        self.state_file = None
        self.partition = None
        self.m = 3
        self.config_file = None
        self.initial_witness_file = None

    def validate_and_set_args(self, **args):
        """
        Validates and sets the arguments required for the witness search.

        Raises:
            ValueError: If the state file is missing or an option is invalid
        """
        state_file = args.get("state_file")
        if not state_file:
            raise ValueError("OPTIMIZE operation requires a state_file")
        self.state_file = self.resolve_input_path(state_file)
        self.partition = args.get("partition")
        self.m = int(args.get("m") or 3)
        if self.m < 1:
            raise ValueError(f"m must be at least 1, got {self.m}")
        if args.get("config_file"):
            self.config_file = self.resolve_input_path(args["config_file"])
        if args.get("initial_witness_file"):
            self.initial_witness_file = self.resolve_input_path(args["initial_witness_file"])

    def get_operation_name(self):
        return "OPTIMIZE"

    def get_operation_details(self):
        return {
            "state_file": self.state_file,
            "partition": self.partition,
            "m": self.m,
            "config_file": self.config_file,
            "initial_witness_file": self.initial_witness_file,
        }

    def post_execute(self, state, result):
        self.emit_result(state, result)

    def pre_execute(self, state):
        return

    def apply_operation(self, state, **kwargs):
        quantum_state = self.open_state(self.state_file)
        partition = parse_partition(self.partition, quantum_state.n_modes)
        config = GaConfig()
        if self.config_file:
            with open(self.config_file, "r") as f:
                config = GaConfig.from_json(json.load(f))
        config = replace(config, seed=state['seed'], threads=state['threads'])
        initial = self.open_witness(self.initial_witness_file) if self.initial_witness_file else None
        result = ga_optimize(quantum_state, partition, self.m, config=config, initial=initial)
        return {
            "witness": result.witness.to_json(),
            "report": result.report.to_json(),
            "fitness_history": list(result.fitness_history),
        }
