"""Smoke test for the evdarp_py extension.

Build and install first:
    cd crates/python && maturin build --release -o dist && pip install dist/*.whl
Then run with python3 or pytest.
"""

import json
import math
import os
import subprocess
import sys
import tempfile

import evdarp_py as ev

HERE = os.path.dirname(os.path.abspath(__file__))

BENCH = """\
2 2 480 3 30
0 0.0 0.0 0 0 0 480
1 1.0 2.0 3 1 60 75
2 -2.0 1.0 3 1 0 480
3 4.0 4.0 3 -1 0 480
4 -3.0 4.0 3 -1 90 105
"""


def test_instance_round_trip():
    inst = ev.Instance.generate(5, 3, seed=4)
    assert inst.n == 5 and inst.capacity == 3
    again = ev.Instance.from_json(inst.to_json())
    assert again.to_json() == inst.to_json()
    assert ev.Instance.generate(25, 6).fleet_size == 15

    bench = ev.Instance.from_cordeau(BENCH).tighten()
    assert bench.n == 2
    try:
        ev.Instance.from_cordeau(BENCH.replace("1.0 2.0", "1.0 x"))
    except ValueError as err:
        assert "line 3" in str(err)
    else:
        raise AssertionError("broken benchmark accepted")


def test_graph_sizes():
    stats = ev.graph_stats(ev.Instance.generate(3, 3, seed=1))
    # n = 3, Q = 3: every subset of the others fits
    assert stats["nodes"] == stats["closed_form_nodes"]
    assert stats["arcs"] == sum(stats["arcs_by_class"].values())
    assert ev.graph_dot(ev.Instance.generate(1, 3)).startswith("digraph")


def test_oracle_and_validator():
    inst = ev.Instance.generate(3, 3, seed=5)
    sol = ev.solve_oracle(inst, "cost-excess")
    ok, problems = ev.validate(inst, sol)
    assert ok, problems
    assert sorted(sol.accepted) == [1, 2, 3]
    obj = sol.objective
    assert math.isclose(obj["total"], obj["f_c"] + 3 * obj["f_e"], rel_tol=1e-9)
    assert math.isclose(ev.evaluate(inst, sol, "cost-excess"), obj["total"], rel_tol=1e-12)
    back = ev.Solution.from_json(sol.to_json(), inst)
    assert back.tours == sol.tours

    try:
        ev.solve_oracle(ev.Instance.generate(16, 3), "cost")
    except ValueError as err:
        assert "exceeds oracle limit" in str(err)
    else:
        raise AssertionError("oracle limit ignored")


def test_model_files():
    inst = ev.Instance.generate(1, 3, seed=2)
    m = ev.Model(inst, "model3", "cost")
    assert m.num_columns == 6
    mps = m.to_mps("one")
    assert mps.startswith("NAME") and mps.rstrip().endswith("ENDATA")
    assert "Binaries" in m.to_lp("one")
    mapping = json.loads(m.mapping_json())
    assert mapping["variant"] == "model3"
    try:
        ev.Model(inst, objective="rce")
    except ValueError:
        pass
    else:
        raise AssertionError("rce without denial accepted")
    assert ev.Model(inst, objective="rce", allow_denial=True).objective_offset == 60.0


def test_external_solver_round_trip():
    try:
        import highspy  # noqa: F401
    except ImportError:
        print("skip: highspy not installed")
        return
    inst = ev.Instance.generate(3, 3, seed=5)
    best = ev.solve_oracle(inst, "cost-excess")
    m = ev.Model(inst, "model2", "cost-excess")
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "g.mps")
        with open(path, "w") as f:
            f.write(m.to_mps("g"))
        subprocess.run([sys.executable, os.path.join(HERE, "solve_mps.py"), path], check=True)
        with open(os.path.join(tmp, "g.sol.txt")) as f:
            sol = m.import_assignment(f.read())
    assert ev.validate(inst, sol)[0]
    assert abs(sol.objective["total"] - best.objective["total"]) < 1e-4


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"ok  {name}")
