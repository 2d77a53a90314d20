from operations.BaselineOperation import BaselineOperation
from operations.EvalOperation import EvalOperation
from operations.OptimizeOperation import OptimizeOperation
from operations.ReproduceOperation import ReproduceOperation
from operations.SevOperation import SevOperation
from operations.SimulateOperation import SimulateOperation
from operations.SweepOperation import SweepOperation


class WitnessForgeTool:
    """
    A tool for building, solving and testing displaced photon-number entanglement witnesses.

    This class provides a centralized interface for executing the witness operations
    (evaluation, separability bounds, optimization, sweeps, simulation, baselines and
    the reproduce suite). It keeps the run settings shared by every operation.
    """

    def __init__(self, seed=0, threads=1, cutoff=None, out=None, output_format=None):
        """
        Initialize the WitnessForgeTool with its run settings.

        Args:
            seed (int): Seed of every random draw
            threads (int): Worker threads handed to the library
            cutoff (int): Fock truncation n_max, None for automatic
            out (str): Output file, None for stdout
            output_format (str): json, csv or table, None for each operation's default
        """
        self.state = {
            'seed': seed,
            'threads': threads,
            'cutoff': cutoff,
            'out': out,
            'format': output_format,
            'failed': False,
            'last_result': None,
        }

    def execute_operation(self, operation_name, **operation_args):
        """
        Execute a witness operation with the given arguments.

        Args:
            operation_name (str): The name of the operation to execute
            **operation_args: Keyword arguments specific to the operation

        Returns:
            The result of the operation

        Raises:
            ValueError: If the operation is unknown or its arguments are invalid
        """
        if operation_name == "EVAL":
            operation = EvalOperation()
        elif operation_name == "SEV":
            operation = SevOperation()
        elif operation_name == "OPTIMIZE":
            operation = OptimizeOperation()
        elif operation_name == "SWEEP":
            operation = SweepOperation()
        elif operation_name == "SIMULATE":
            operation = SimulateOperation()
        elif operation_name == "BASELINE":
            operation = BaselineOperation()
        elif operation_name == "REPRODUCE":
            operation = ReproduceOperation()
        else:
            raise ValueError(f"Operation {operation_name} is not supported")

        operation.validate_and_set_args(**operation_args)
        return operation.execute(self.state)
