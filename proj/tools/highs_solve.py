#!/usr/bin/env python3
"""Solve an LP-format model with HiGHS and write a solution file for ExternalLpBackend.

usage: highs_solve.py MODEL.lp SOLUTION.txt [TIMEOUT_SECONDS]

Output: a status word (optimal | infeasible | timelimit | error), then one
"name value" line per column when a point was found.
"""
import sys

import highspy


def main(argv):
    if len(argv) < 3:
        print(__doc__, file=sys.stderr)
        return 2
    lp_path, sol_path = argv[1], argv[2]
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("random_seed", 0)
    h.setOptionValue("threads", 1)
    if len(argv) > 3:
        h.setOptionValue("time_limit", float(argv[3]))
    h.setOptionValue("mip_feasibility_tolerance", 1e-7)
    h.setOptionValue("primal_feasibility_tolerance", 1e-8)
    if h.readModel(lp_path) == highspy.HighsStatus.kError:
        status = "error"
    else:
        h.run()
        s = h.getModelStatus()
        M = highspy.HighsModelStatus
        status = {M.kOptimal: "optimal", M.kInfeasible: "infeasible", M.kTimeLimit: "timelimit"}.get(s, "error")
    with open(sol_path, "w") as out:
        out.write(status + "\n")
        if status == "optimal":
            names = h.getLp().col_names_
            values = h.getSolution().col_value
            for n, v in zip(names, values):
                out.write("%s %.17g\n" % (n, v))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
