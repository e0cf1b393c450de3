"""Shared fixtures for the toolkit tests."""

import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from core.decision_table import DecisionTable  # noqa: E402


@pytest.fixture
def t1_table():
    """a=[0,0,1,1], b=[0,1,0,1], d=[0,0,1,1]: a alone determines d."""
    return DecisionTable(
        condition=np.array([[0, 0], [0, 1], [1, 0], [1, 1]]),
        decision=np.array([0, 0, 1, 1]),
        attribute_names=["a", "b"],
    )


@pytest.fixture
def t2_table():
    """a=[0,0,1,1], d=[0,1,1,1]: only the a=1 block is consistent."""
    return DecisionTable(
        condition=np.array([[0], [0], [1], [1]]),
        decision=np.array([0, 1, 1, 1]),
        attribute_names=["a"],
    )


@pytest.fixture
def xor_table():
    """d = a XOR b."""
    return DecisionTable(
        condition=np.array([[0, 0], [0, 1], [1, 0], [1, 1]]),
        decision=np.array([0, 1, 1, 0]),
        attribute_names=["a", "b"],
    )


@pytest.fixture
def t1_csv(tmp_path):
    path = tmp_path / "t1.csv"
    path.write_text("a,b,class\n0,0,x\n0,1,x\n1,0,y\n1,1,y\n", encoding="utf-8")
    return path


@pytest.fixture
def blobs_csv(tmp_path):
    """Two well separated classes over three genes, the second gene is noise."""
    rng = np.random.default_rng(7)
    rows = ["g1,g2,g3,class"]
    for i in range(24):
        label = i % 2
        g1 = rng.normal(label * 10.0, 1.0)
        g2 = rng.normal(0.0, 1.0)
        g3 = rng.normal(label * 10.0, 1.0)
        rows.append(f"{g1:.6f},{g2:.6f},{g3:.6f},{'tumor' if label else 'normal'}")
    path = tmp_path / "blobs.csv"
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path
