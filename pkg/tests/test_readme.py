"""Every CLI example in the README is executed here."""

import re
import subprocess
import sys
from pathlib import Path

import pytest

README = Path(__file__).resolve().parent.parent / "README.md"


def readme_cli_commands():
    text = README.read_text(encoding="utf-8")
    blocks = re.findall(r"```bash\n(.*?)```", text, flags=re.S)
    cmds = []
    for block in blocks:
        for line in block.splitlines():
            line = line.strip()
            if line.startswith("dynirf "):
                cmds.append(line)
    return cmds


COMMANDS = readme_cli_commands()


def test_readme_has_examples():
    assert len(COMMANDS) >= 8


@pytest.mark.parametrize("cmd", COMMANDS, ids=[c[:60] for c in COMMANDS])
def test_readme_command_runs(cmd):
    argv = [sys.executable, "-m", "dynirf.cli"] + cmd.split()[1:]
    proc = subprocess.run(argv, capture_output=True, text=True, timeout=560)
    assert proc.returncode == 0, f"{cmd}\nstderr: {proc.stderr[:500]}"
    assert proc.stdout
