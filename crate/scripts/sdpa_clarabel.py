#!/usr/bin/env python3
"""Solve a single-block SDPA .dat-s file with Clarabel and write SDPA-style output.

Usage: sdpa_clarabel.py INPUT.dat-s OUTPUT

Solves the SDPA dual form  max <F0, Y>  s.t. <Fi, Y> = ci, Y psd, and reports
objValPrimal / objValDual / phase.value lines that squash's external backend
reads. Y is passed to Clarabel as its packed upper triangle, so memory stays
proportional to the number of nonzeros.
"""
import math
import sys

import clarabel
import numpy as np
import scipy.sparse as sp


def read_sdpa(path):
    tokens = []
    with open(path) as fh:
        for line in fh:
            if line.startswith(("*", '"')):
                continue
            for ch in "{}(),":
                line = line.replace(ch, " ")
            tokens.extend(line.split())
    it = iter(tokens)
    m = int(next(it))
    nblock = int(next(it))
    if nblock != 1:
        raise SystemExit("only single-block files are supported")
    n = int(next(it))
    c = np.array([float(next(it)) for _ in range(m)])
    rows, cols, vals, mats = [], [], [], []
    for tok in it:
        mats.append(int(tok))
        next(it)
        rows.append(int(next(it)) - 1)
        cols.append(int(next(it)) - 1)
        vals.append(float(next(it)))
    return m, n, c, np.array(mats, dtype=int), np.array(rows, dtype=int), np.array(cols, dtype=int), np.array(vals)


def main():
    src, dst = sys.argv[1], sys.argv[2]
    m, n, c, mats, rows, cols, vals = read_sdpa(src)
    lo, hi = np.minimum(rows, cols), np.maximum(rows, cols)
    # packed column-major upper triangle, off-diagonals scaled by sqrt(2)
    packed = hi * (hi + 1) // 2 + lo
    size = n * (n + 1) // 2
    # <F, Y> = sum F_ii Y_ii + 2 sum_{i<j} F_ij Y_ij = sum F_ii x_ii + sqrt(2) sum F_ij x_ij
    weight = np.where(lo == hi, 1.0, math.sqrt(2.0))
    coef = sp.csr_matrix((vals * weight, (mats, packed)), shape=(m + 1, size))

    q = -coef[0].toarray().ravel()
    a = sp.vstack([coef[1:], -sp.identity(size)]).tocsc()
    b = np.concatenate([c, np.zeros(size)])
    cones = [clarabel.ZeroConeT(m), clarabel.PSDTriangleConeT(n)] if m else [clarabel.PSDTriangleConeT(n)]
    if not m:
        a = (-sp.identity(size)).tocsc()
        b = np.zeros(size)
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.tol_gap_abs = settings.tol_gap_rel = 1e-9
    settings.tol_feas = 1e-9
    solution = clarabel.DefaultSolver(sp.csc_matrix((size, size)), q, a, b, cones, settings).solve()

    status = str(solution.status)
    phase = {
        "Solved": "pdOPT",
        "AlmostSolved": "pdFEAS",
        "PrimalInfeasible": "pFEAS_dINF",
        "AlmostPrimalInfeasible": "pFEAS_dINF",
        "DualInfeasible": "pINF_dFEAS",
        "AlmostDualInfeasible": "pINF_dFEAS",
    }.get(status, "noINFO")
    # Clarabel minimises -<F0, Y>, which is SDPA's dual problem
    dual = -solution.obj_val
    primal = -solution.obj_val_dual
    with open(dst, "w") as fh:
        fh.write(f"phase.value = {phase}\n")
        fh.write(f"objValPrimal = {primal:.17e}\n")
        fh.write(f"objValDual = {dual:.17e}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
