"""Reference optima for the SDPA fixtures, computed with cvxpy.

Each file is read in SDPA sparse format and solved as
    max <F0, X>  s.t.  <Fk, X> = c_k,  X block-diagonal PSD
(negative block sizes are nonnegative diagonals). Clarabel gives the
recorded value; SCS is run as a cross-check and must agree to 1e-5.

    python3 solve_fixtures.py sdp > sdp/optima.json
"""

import json
import pathlib
import sys

import cvxpy as cp
import numpy as np


def read_sdpa(text):
    lines = [l for l in text.splitlines() if l.strip() and l.strip()[0] not in '"*']
    tok = lambda s: s.replace(",", " ").replace("{", " ").replace("}", " ").replace("(", " ").replace(")", " ").split()
    m = int(tok(lines[0])[0])
    nb = int(tok(lines[1])[0])
    sizes = [int(v) for v in tok(lines[2])[:nb]]
    c = np.array([float(v.replace("D", "e").replace("d", "e")) for v in tok(lines[3])[:m]])
    mats = [[np.zeros((abs(s), abs(s))) for s in sizes] for _ in range(m + 1)]
    for line in lines[4:]:
        k, b, i, j, v = tok(line)[:5]
        k, b, i, j, v = int(k), int(b) - 1, int(i) - 1, int(j) - 1, float(v)
        mats[k][b][i, j] += v
        if i != j:
            mats[k][b][j, i] += v
    return sizes, c, mats


def solve(sizes, c, mats, solver):
    xs, cons = [], []
    for s in sizes:
        if s > 0:
            x = cp.Variable((s, s), symmetric=True)
            cons.append(x >> 0)
        else:
            x = cp.Variable(-s)
            cons.append(x >= 0)
        xs.append(x)

    def inner(ms):
        terms = []
        for s, x, a in zip(sizes, xs, ms):
            if s > 0:
                terms.append(cp.trace(a @ x))
            else:
                terms.append(np.diag(a) @ x)
        return cp.sum(cp.hstack(terms))

    for k in range(len(c)):
        cons.append(inner(mats[k + 1]) == c[k])
    prob = cp.Problem(cp.Maximize(inner(mats[0])), cons)
    opts = {"CLARABEL": dict(tol_gap_abs=1e-11, tol_gap_rel=1e-11, tol_feas=1e-11),
            "SCS": dict(eps_abs=1e-9, eps_rel=1e-9, max_iters=200000)}[solver]
    prob.solve(solver=solver, **opts)
    return prob.status, prob.value


def main(directory):
    out = {}
    for path in sorted(pathlib.Path(directory).glob("*.dat-s")):
        sizes, c, mats = read_sdpa(path.read_text())
        s1, v1 = solve(sizes, c, mats, "CLARABEL")
        s2, v2 = solve(sizes, c, mats, "SCS")
        if s1 != "optimal" or abs(v1 - v2) > 1e-5 * (1 + abs(v1)):
            sys.exit(f"{path.name}: clarabel {s1} {v1}, scs {s2} {v2}")
        out[path.name] = {"optimum": v1, "scs": v2}
    json.dump(out, sys.stdout, indent=2, sort_keys=True)
    print()


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "sdp")
