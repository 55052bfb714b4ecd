#!/usr/bin/env python3
"""Solve MPS files with HiGHS and write flat `name value` assignments.

Usage: solve_mps.py MODEL.mps [MODEL.mps ...]

For each model `X.mps` the assignment goes to `X.sol.txt`, led by a
`# objective <value>` line, or `# status infeasible` when no solution exists.
"""

import sys

import highspy


def solve(path, time_limit=600.0):
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("time_limit", time_limit)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", 1e-9)
    h.setOptionValue("mip_feasibility_tolerance", 1e-9)
    h.setOptionValue("primal_feasibility_tolerance", 1e-9)
    status = h.readModel(path)
    if status != highspy.HighsStatus.kOk:
        raise SystemExit(f"cannot read {path}")
    h.run()
    out = path[:-4] + ".sol.txt" if path.endswith(".mps") else path + ".sol.txt"
    model_status = h.getModelStatus()
    with open(out, "w") as f:
        if model_status != highspy.HighsModelStatus.kOptimal:
            f.write(f"# status {h.modelStatusToString(model_status).lower()}\n")
            return out
        info = h.getInfo()
        f.write(f"# objective {info.objective_function_value:.12g}\n")
        lp = h.getLp()
        values = h.getSolution().col_value
        for name, value in zip(lp.col_names_, values):
            f.write(f"{name} {value:.12g}\n")
    return out


def main(argv):
    if len(argv) < 2:
        print(__doc__.strip(), file=sys.stderr)
        return 2
    for path in argv[1:]:
        print(solve(path))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
