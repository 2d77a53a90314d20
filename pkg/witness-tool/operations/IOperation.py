from abc import ABC, abstractmethod
import csv
import io
import json
import os

import click

from state_models import load_state
from witness_core import load_witness


class IOperation(ABC):
    def __init__(self):
        """
        Initializes the operation with an empty result.
        """
        self.result = None

    @abstractmethod
    def validate_and_set_args(self, **args):
        """
        Validates and sets the arguments required for the operation.

        This method should be implemented by each operation to validate
        its specific required arguments.

        Args:
            **args: Keyword arguments containing the operation parameters

        Raises:
            ValueError: If any required arguments are missing or invalid
        """
        pass

    @abstractmethod
    def get_operation_name(self):
        """
        Returns the name of the operation.

        Returns:
            str: The operation's name
        """
        pass

    @abstractmethod
    def get_operation_details(self):
        """
        Returns the details of the operation. Used when echoing the run configuration.

        Returns:
            dict: A dictionary containing the operation's parameters and details
        """
        pass

    @abstractmethod
    def apply_operation(self, state, **kwargs):
        """
        Runs the computation of the operation.

        Args:
            state (dict): The shared run settings (seed, threads, cutoff, output)
            **kwargs: Additional keyword arguments

        Returns:
            The JSON-ready result of the operation
        """
        pass

    @abstractmethod
    def pre_execute(self, state):
        """
        Performs any necessary setup before the operation is executed.

        Args:
            state (dict): The shared run settings
        """
        pass

    @abstractmethod
    def post_execute(self, state, result):
        """
        Performs any necessary output after the operation is executed.

        Args:
            state (dict): The shared run settings
            result: The value returned by apply_operation
        """
        pass

    def execute(self, state):
        """
        Executes the operation: setup, computation, output.

        Args:
            state (dict): The shared run settings

        Returns:
            The result of the operation
        """
        self.pre_execute(state)
        self.result = self.apply_operation(state)
        state['last_result'] = self.result
        self.post_execute(state, self.result)
        click.echo(f"Operation {self.get_operation_name()} executed successfully", err=True)
        return self.result

    @staticmethod
    def resolve_input_path(file_name):
        """
        Finds an input file either at the given path or in the 'library' folder.

        Args:
            file_name (str): A path, or a file name in 'library' with or without the .json extension

        Returns:
            str: The existing path

        Raises:
            ValueError: If no such file exists
        """
        candidates = [file_name, f"library/{file_name}", f"library/{file_name}.json"]
        for candidate in candidates:
            if os.path.isfile(candidate):
                return candidate
        raise ValueError(f"A file with the name {file_name} doesn't exist")

    def open_state(self, file_name):
        return load_state(self.resolve_input_path(file_name))

    def open_witness(self, file_name):
        return load_witness(self.resolve_input_path(file_name))

    @staticmethod
    def format_result(result, output_format):
        """
        Renders a result as JSON, CSV or a human-readable table.

        Lists of flat dictionaries become one row each; a single dictionary becomes one
        row of its scalar fields. Tables print numbers with 6 significant digits.

        Args:
            result: Dictionary or list of dictionaries
            output_format (str): "json", "csv" or "table"

        Returns:
            str: The rendered text
        """
        if output_format == "json":
            return json.dumps(result, indent=2)
        rows = result if isinstance(result, list) else [result]
        if not rows:
            return ""
        fields = [key for key, value in rows[0].items() if not isinstance(value, (dict, list))]
        if output_format == "table":
            def cell(value):
                return f"{value:.6g}" if isinstance(value, float) else str(value)
            cells = [[cell(row.get(key)) for key in fields] for row in rows]
            widths = [max(len(key), *(len(line[i]) for line in cells)) for i, key in enumerate(fields)]
            lines = ["  ".join(key.ljust(w) for key, w in zip(fields, widths))]
            lines += ["  ".join(value.ljust(w) for value, w in zip(line, widths)) for line in cells]
            return "\n".join(lines) + "\n"
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buffer.getvalue()

    def emit(self, state, text):
        """
        Writes text to the --out file (created under 'exported' when given a bare name) or to stdout.
        """
        out = state.get('out')
        if not out:
            click.echo(text.rstrip("\n"))
            return
        if not os.path.dirname(out):
            out = os.path.join("exported", out)
        os.makedirs(os.path.dirname(out), exist_ok=True)
        with open(out, "w") as f:
            f.write(text if text.endswith("\n") else text + "\n")
        click.echo(f"Result written to {out}", err=True)

    def emit_result(self, state, result, default_format="json"):
        self.emit(state, self.format_result(result, state.get('format') or default_format))
