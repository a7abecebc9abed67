"""Smoke test for the rtlab extension module.

Build and install with `maturin develop -m crates/py/Cargo.toml`, or copy
target/release/librtlab_py.so to rtlab.so on PYTHONPATH, then run
`python python/smoke_test.py` or `pytest python/smoke_test.py`.
"""

import json

import rtlab


def test_s3_cohomology():
    assert rtlab.s3_h1(True) == (1, 1)
    assert rtlab.s3_h1(False) == (0, 0)


def test_algebra_and_ideals():
    a = rtlab.Algebra("dual_numbers", 3, 2)
    assert a.rank == 2 and a.log_order == 4
    assert a.mul([0, 1], [0, 1]) == [0, 0]
    assert a.is_unit([1, 1]) and not a.is_unit([3, 1])
    assert a.mul(a.inv([2, 1]), [2, 1]) == a.one()
    for i in a.ideals():
        assert i.is_principal()[0] == i.is_principal_exhaustive()[0]
        assert i.min_generators() == i.min_generators_exhaustive()
    m = a.max_ideal()
    assert m.min_generators() == 2
    assert m.contains(a.ideal([[3, 0]]))
    assert a.ideal([[3, 0], [0, 1]]) == m


def test_criterion_fixtures():
    fixtures = json.loads(rtlab.criterion_fixtures())
    positive = [f for f in fixtures if f["violates"] is None]
    negative = [f for f in fixtures if f["violates"] is not None]
    assert len(positive) >= 10 and len(negative) >= 5
    assert all(f["report"]["outcome"]["status"] == "consistent" for f in positive)
    for f in negative:
        assert f["report"]["outcome"]["failed"] == [f["violates"]]


def test_scenario_and_demo():
    text = """
kind = "cohomology"
[base]
p = 3
e = 1
[group]
catalog = "symmetric3"
[module]
from = "explicit"
torsion = [1]
images = [[[1]], [[-1]]]
[expect]
"h1.log_order" = 1
"""
    code, report = rtlab.run_scenario(text)
    assert code == 0
    assert json.loads(report)["results"]["h1"]["log_order"] == 1
    code, first = rtlab.demo("all")
    assert code == 0 and rtlab.demo("all")[1] == first
    try:
        rtlab.run_scenario('kind = "gma"\nbogus = 1\n')
    except ValueError as e:
        assert "line 2" in str(e)
    else:
        raise AssertionError("malformed scenario accepted")


def test_fuzz():
    code, report = rtlab.fuzz("criterion", 50, seed=3)
    assert code == 0
    assert json.loads(report)["status"] == "ok"


if __name__ == "__main__":
    for name, f in sorted(globals().items()):
        if name.startswith("test_") and callable(f):
            f()
            print("ok", name)
