"""Fixed-format MPS export for cross-checking against third-party solvers.

Emits the classic NAME/ROWS/COLUMNS/RHS/RANGES/BOUNDS/ENDATA layout with
fields at the fixed column positions (2, 5, 15, 25, 40, 50). Fixed-format
names are limited to eight characters, so rows and columns are written
under generated identifiers (``R0000001``, ``C0000001``); the mapping back
to the problem's diagnostic names is returned to the caller and can be
embedded as comment lines.
"""

from __future__ import annotations

import io
import math

import numpy as np

from .lp import LpProblem


def _field_line(f1: str = "", f2: str = "", f3: str = "", f4: str = "",
                f5: str = "", f6: str = "") -> str:
    # fixed MPS field start columns (1-indexed): 2, 5, 15, 25, 40, 50
    line = ""
    for start, text in ((2, f1), (5, f2), (15, f3), (25, f4), (40, f5), (50, f6)):
        if text:
            line = line.ljust(start - 1) + text
    return line.rstrip()


def _number(value: float) -> str:
    """Shortest representation that fits the 12-character numeric field."""
    if value == math.floor(value) and abs(value) < 1e12:
        text = f"{int(value)}."
        if len(text) <= 12:
            return text
    for digits in (10, 9, 8, 7, 6, 5):
        text = f"{value:.{digits}G}"
        if len(text) <= 12:
            return text
    return f"{value:.4G}"


def mps_name_map(problem: LpProblem) -> dict[str, dict[str, str]]:
    rows = {problem.row_names[i]: f"R{i + 1:07d}" for i in range(problem.num_rows)}
    cols = {problem.variable_names[j]: f"C{j + 1:07d}" for j in range(problem.num_variables)}
    return {"rows": rows, "columns": cols}


def format_mps(problem: LpProblem, name: str = "HEATPLAN",
               comment_names: bool = False) -> str:
    problem.validate()
    out = io.StringIO()
    write = lambda line: out.write(line + "\n")

    m, n = problem.num_rows, problem.num_variables
    rname = [f"R{i + 1:07d}" for i in range(m)]
    cname = [f"C{j + 1:07d}" for j in range(n)]
    rl, ru = problem.row_lower, problem.row_upper
    lo, up = problem.var_lower, problem.var_upper

    write(f"NAME          {name}")
    if comment_names:
        for i in range(m):
            write(f"* row {rname[i]} = {problem.row_names[i]}")
        for j in range(n):
            write(f"* col {cname[j]} = {problem.variable_names[j]}")

    # row sense: E for equalities, L rows carry the upper bound (a RANGES
    # entry restores a finite lower bound), G rows carry the lower bound,
    # N for non-binding rows
    sense = []
    for i in range(m):
        if np.isfinite(rl[i]) and rl[i] == ru[i]:
            sense.append("E")
        elif np.isfinite(ru[i]):
            sense.append("L")
        elif np.isfinite(rl[i]):
            sense.append("G")
        else:
            sense.append("N")

    write("ROWS")
    write(_field_line("N", "COST"))
    for i in range(m):
        write(_field_line(sense[i], rname[i]))

    write("COLUMNS")
    csc = problem.matrix_csc()
    for j in range(n):
        # every column gets an explicit objective entry so it exists even
        # when it appears in no row
        write(_field_line("", cname[j], "COST", _number(float(problem.objective[j]))))
        start, end = csc.indptr[j], csc.indptr[j + 1]
        for k in range(start, end):
            i = csc.indices[k]
            write(_field_line("", cname[j], rname[i], _number(float(csc.data[k]))))

    write("RHS")
    for i in range(m):
        if sense[i] == "E" or sense[i] == "G":
            value = rl[i]
        elif sense[i] == "L":
            value = ru[i]
        else:
            continue
        if value != 0.0:
            write(_field_line("", "RHS", rname[i], _number(float(value))))

    ranged = [i for i in range(m) if sense[i] == "L" and np.isfinite(rl[i]) and rl[i] < ru[i]]
    if ranged:
        write("RANGES")
        for i in ranged:
            write(_field_line("", "RNG", rname[i], _number(float(ru[i] - rl[i]))))

    write("BOUNDS")
    for j in range(n):
        if np.isfinite(lo[j]) and lo[j] == up[j]:
            write(_field_line("FX", "BND", cname[j], _number(float(lo[j]))))
            continue
        if not np.isfinite(lo[j]) and not np.isfinite(up[j]):
            write(_field_line("FR", "BND", cname[j]))
            continue
        if not np.isfinite(lo[j]):
            write(_field_line("MI", "BND", cname[j]))
        elif lo[j] != 0.0:
            write(_field_line("LO", "BND", cname[j], _number(float(lo[j]))))
        if np.isfinite(up[j]):
            write(_field_line("UP", "BND", cname[j], _number(float(up[j]))))

    write("ENDATA")
    return out.getvalue()


def write_mps(problem: LpProblem, path, name: str = "HEATPLAN",
              comment_names: bool = False) -> dict[str, dict[str, str]]:
    """Write the problem to path; returns the generated-name mapping."""
    text = format_mps(problem, name=name, comment_names=comment_names)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(text)
    return mps_name_map(problem)
