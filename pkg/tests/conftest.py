import os
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

for path in (os.path.join(ROOT, "witness-library", "python"), os.path.join(ROOT, "witness-tool")):
    if path not in sys.path:
        sys.path.insert(0, path)


@pytest.fixture
def repo_root(monkeypatch):
    """Run from the repository root so 'library' and 'exported' resolve like they do for the tool."""
    monkeypatch.chdir(ROOT)
    return ROOT
