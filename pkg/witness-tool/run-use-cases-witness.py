import json
import logging
import os
import sys
sys.path.append('.')
sys.path.append('./witness-library/python')
from dotenv import load_dotenv
from WitnessForgeTool import WitnessForgeTool

load_dotenv(os.path.join(os.path.dirname(os.path.abspath(__file__)), ".env"))


def execute_use_case(tool, use_case_id):
    """
    Execute a single use case from a JSON file.

    This function:
    1. Loads the use case definition from a JSON file
    2. Executes each operation in sequence
    3. Reports whether every reproduced value met its target

    Args:
        tool (WitnessForgeTool): The witness tool instance
        use_case_id (str): The identifier of the use case to execute

    Returns:
        bool: True if the use case executed successfully, False otherwise

    Note:
        - The use case file should be in the witness-tool/use-cases directory
        - Each use case contains a list of operations with their arguments
    """
    path = f"witness-tool/use-cases/{use_case_id}.json"
    if not os.path.exists(path):
        print(f"File {path} not found")
        return False

    with open(path, "r") as input_handle:
        use_case = json.load(input_handle)
        print(f'\nRunning use case: {use_case["name"]}...\n')

    for operation in use_case["operations"]:
        operation_cmd = operation["operation_command"]
        operation_args = operation["operation_arguments"]
        try:
            tool.execute_operation(operation_cmd, **operation_args)
        except ValueError as e:
            print(f"\nError: {e}")
            return False

    if tool.state['failed']:
        print(f"Use case {use_case['name']} missed at least one target\n")
        return False
    print(f"Finished use case: {use_case['name']}\n")
    return True


def run_use_cases(use_case_ids=None):
    """
    Run the witness tool use case executor.

    Use case names given on the command line are run once; without them the runner
    asks for names interactively until 'exit' is entered. Each batch runs in a fresh
    WitnessForgeTool instance.

    Args:
        use_case_ids (list): Use case names to run non-interactively

    Returns:
        bool: True if the last batch finished successfully
    """
    logging.basicConfig(level=os.getenv("WITNESS_FORGE_LOG_LEVEL", "WARNING").upper())
    threads = int(os.getenv("WITNESS_FORGE_THREADS", "1"))
    success = True
    while True:
        if use_case_ids is None:
            print("\nWelcome to the witness tool - Use case runner!")
            print(" - Use cases are defined in witness-tool/use-cases.")
            print(" - Each use case file contains a list of operations to be executed in sequence.")
            print(" - Run use cases by entering the use case file name(s), separated by commas.")
            print(" - Example: reproduce-bell, reproduce-tmsv")
            print(" - Enter 'exit' to quit")
            use_case_input = input("\nEnter the use case file name(s): ")
            if use_case_input.lower() == 'exit':
                break
            ids = [id.strip() for id in use_case_input.split(',')]
        else:
            ids = use_case_ids

        tool = WitnessForgeTool(threads=threads, output_format="table")
        success = True
        for use_case_id in ids:
            if use_case_id and not execute_use_case(tool, use_case_id):
                success = False
                break

        if success:
            print("\n\nFinished all use case runs successfully.\n")
        else:
            print("\n\nUse case run failed. Please try again.\n")
        if use_case_ids is not None:
            break
    return success


if __name__ == '__main__':
    names = [name.strip() for arg in sys.argv[1:] for name in arg.split(',')]
    ok = run_use_cases(names or None)
    sys.exit(0 if ok else 1)
