from pathlib import Path

import pytest

from jungle.core import Signature
from jungle.dpo import Rule, make_rule
from jungle.frontend import Document, parse

FIXTURES = Path(__file__).parent / "fixtures"

ARITH = Signature({"add": 2, "sub": 2, "mul": 2})


@pytest.fixture(scope="session")
def worked_doc() -> Document:
    """The four-input expression graph and the add/sub cancellation rule."""
    return parse((FIXTURES / "cancel_sub.tg").read_text())


@pytest.fixture(scope="session")
def worked_rule(worked_doc) -> Rule:
    return worked_doc.rule("cancel_sub")


@pytest.fixture(scope="session")
def worked_graph(worked_doc):
    return worked_doc.graphs["A"].graph


@pytest.fixture(scope="session")
def expected_result():
    """What rewriting the worked example must produce, built independently."""
    text = """
    sig { add/2; sub/2; mul/2; }
    graph B(4 -> 1) {
      r = mul(in1, in3);
      s = add(in0, r);
      out0 = s;
    }
    """
    return parse(text).graphs["B"].graph


def _load(name: str) -> Document:
    return parse((FIXTURES / name).read_text())


@pytest.fixture(scope="session")
def load_fixture():
    return _load
