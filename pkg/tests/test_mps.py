import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_binary_instance
from lbforge.bench import GeneratorSpec, generate
from lbforge.milp import CONTINUOUS, INTEGER, MilpInstance, MpsError, format_mps, parse_mps, read_mps, solve_milp, write_mps

SAMPLE = """NAME          demo
OBJSENSE
    MAX
ROWS
 N  obj
 L  c1
 G  c2
 E  c3
COLUMNS
    MARKER                 'MARKER'                 'INTORG'
    x         obj       1.0        c1        2.0
    x         c2        1.0
    MARKER                 'MARKER'                 'INTEND'
    y         obj       2.0        c1        1.0
    y         c3        1.0
    z         obj       -1.0       c2        1.0
RHS
    rhs       c1        10.0       c2        1.0
    rhs       c3        2.5        obj       -4.0
RANGES
    rng       c1        4.0
BOUNDS
 UP bnd       x         4
 LO bnd       z         -2
 UP bnd       z         3
 FR bnd       y
ENDATA
"""


def same_model(a: MilpInstance, b: MilpInstance):
    assert a.maximize == b.maximize and a.obj_offset == b.obj_offset
    np.testing.assert_array_equal(a.c, b.c)
    np.testing.assert_array_equal(a.A.toarray(), b.A.toarray())
    np.testing.assert_array_equal(a.senses, b.senses)
    np.testing.assert_array_equal(a.b, b.b)
    np.testing.assert_array_equal(a.var_kind, b.var_kind)
    np.testing.assert_array_equal(a.lb, b.lb)
    np.testing.assert_array_equal(a.ub, b.ub)


def test_parse_sample():
    inst = parse_mps(SAMPLE)
    assert inst.name == "demo" and inst.maximize
    assert inst.var_names == ("x", "y", "z")
    assert inst.var_kind.tolist() == [INTEGER, CONTINUOUS, CONTINUOUS]
    assert inst.lb.tolist() == [0, -np.inf, -2] and inst.ub.tolist() == [4, np.inf, 3]
    # ranged L row expands into a >= and a <= row
    assert inst.num_cons == 4
    assert inst.reported(inst.obj_offset) == 4.0  # objective RHS -4 means constant +4


@pytest.mark.parametrize("family", ["sc", "mis", "ca", "gisp"])
def test_round_trip_generated(family, tmp_path):
    inst = generate(GeneratorSpec(family, seed=3, rows=30, cols=15, nodes=12, items=20, bids=10))
    path = tmp_path / "i.mps"
    write_mps(inst, path)
    back = read_mps(path)
    same_model(inst, back)
    assert solve_milp(back).objective == solve_milp(inst).objective


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_round_trip_random(seed):
    inst = random_binary_instance(np.random.default_rng(seed))
    same_model(inst, parse_mps(format_mps(inst)))


@pytest.mark.parametrize(
    "text,line",
    [
        ("NAME x\nROWS\n N obj\n X c1\nENDATA\n", 4),
        ("NAME x\nROWS\n N obj\nCOLUMNS\n    a  nope  1\nENDATA\n", 5),
        ("NAME x\nROWS\n N obj\nCOLUMNS\n    a  obj  abc\nENDATA\n", 5),
        ("NAME x\nSOS\nENDATA\n", 2),
        ("NAME x\nROWS\n N obj\n", 0),
    ],
)
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(MpsError) as exc:
        parse_mps(text)
    assert exc.value.line == line
