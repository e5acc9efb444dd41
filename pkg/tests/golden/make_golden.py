"""Regenerate the golden CLI reports: ``python3 tests/golden/make_golden.py``.

Only rerun after an intentional change to report content.
"""

from importlib import resources
from pathlib import Path

from qms.cli import main

EXAMPLES = ("dephasing", "heat_flow", "conjugation")
COMMANDS = ("validate", "decompose")


def spec_path(name: str) -> str:
    return str(resources.files("qms").joinpath("specs", f"{name}.json"))


if __name__ == "__main__":
    here = Path(__file__).parent
    for name in EXAMPLES:
        for command in COMMANDS:
            out = here / f"{name}.{command}.json"
            code = main([command, spec_path(name), "-o", str(out)])
            print(f"{out.name}: exit {code}")
