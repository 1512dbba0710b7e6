"""Standalone MPS parser used to feed exported problems to a third-party solver.

Written against the MPS file convention (ROWS/COLUMNS/RHS/RANGES/BOUNDS
sections, N/L/G/E senses, RANGES sign rules, UP/LO/FX/FR/MI/PL bound
keys); intentionally independent of the package's writer so the export
format is checked, not mirrored.
"""

from __future__ import annotations

import numpy as np


def parse_mps(text: str):
    rows_sense: dict[str, str] = {}
    row_order: list[str] = []
    objective_row = None
    columns: dict[str, dict[str, float]] = {}
    col_order: list[str] = []
    rhs: dict[str, float] = {}
    ranges: dict[str, float] = {}
    bounds: dict[str, dict[str, float]] = {}

    section = None
    for raw_line in text.splitlines():
        if not raw_line.strip() or raw_line.startswith("*"):
            continue
        if not raw_line[0].isspace():
            section = raw_line.split()[0].upper()
            continue
        fields = raw_line.split()
        if section == "ROWS":
            sense, name = fields[0].upper(), fields[1]
            if sense == "N":
                if objective_row is None:
                    objective_row = name
                rows_sense[name] = "N"
            else:
                rows_sense[name] = sense
                row_order.append(name)
        elif section == "COLUMNS":
            col = fields[0]
            if col not in columns:
                columns[col] = {}
                col_order.append(col)
            for row_name, value in zip(fields[1::2], fields[2::2]):
                columns[col][row_name] = columns[col].get(row_name, 0.0) + float(value)
        elif section == "RHS":
            for row_name, value in zip(fields[1::2], fields[2::2]):
                rhs[row_name] = float(value)
        elif section == "RANGES":
            for row_name, value in zip(fields[1::2], fields[2::2]):
                ranges[row_name] = float(value)
        elif section == "BOUNDS":
            key, col = fields[0].upper(), fields[2]
            value = float(fields[3]) if len(fields) > 3 else 0.0
            bounds.setdefault(col, {})[key] = value

    n = len(col_order)
    m = len(row_order)
    c = np.zeros(n)
    a = np.zeros((m, n))
    row_index = {name: i for i, name in enumerate(row_order)}
    for j, col in enumerate(col_order):
        for row_name, value in columns[col].items():
            if row_name == objective_row:
                c[j] = value
            elif row_name in row_index:
                a[row_index[row_name], j] = value

    rl = np.full(m, -np.inf)
    ru = np.full(m, np.inf)
    for name, i in row_index.items():
        sense = rows_sense[name]
        b = rhs.get(name, 0.0)
        if sense == "E":
            rl[i] = ru[i] = b
        elif sense == "L":
            ru[i] = b
        elif sense == "G":
            rl[i] = b
        if name in ranges:
            r = ranges[name]
            if sense == "L":
                rl[i] = ru[i] - abs(r)
            elif sense == "G":
                ru[i] = rl[i] + abs(r)
            elif sense == "E":
                if r >= 0:
                    ru[i] = rl[i] + r
                else:
                    rl[i] = ru[i] + r

    lo = np.zeros(n)
    up = np.full(n, np.inf)
    for j, col in enumerate(col_order):
        for key, value in bounds.get(col, {}).items():
            if key == "UP":
                up[j] = value
            elif key == "LO":
                lo[j] = value
            elif key == "FX":
                lo[j] = up[j] = value
            elif key == "FR":
                lo[j], up[j] = -np.inf, np.inf
            elif key == "MI":
                lo[j] = -np.inf
            elif key == "PL":
                up[j] = np.inf
    return c, a, rl, ru, lo, up


def solve_mps_with_scipy(text: str):
    """Objective of the parsed problem per scipy's HiGHS; None if not optimal."""
    from scipy.optimize import linprog

    c, a, rl, ru, lo, up = parse_mps(text)
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for i in range(a.shape[0]):
        if np.isfinite(rl[i]) and rl[i] == ru[i]:
            a_eq.append(a[i])
            b_eq.append(rl[i])
            continue
        if np.isfinite(ru[i]):
            a_ub.append(a[i])
            b_ub.append(ru[i])
        if np.isfinite(rl[i]):
            a_ub.append(-a[i])
            b_ub.append(-rl[i])
    result = linprog(
        c,
        A_ub=np.asarray(a_ub) if a_ub else None,
        b_ub=np.asarray(b_ub) if b_ub else None,
        A_eq=np.asarray(a_eq) if a_eq else None,
        b_eq=np.asarray(b_eq) if b_eq else None,
        bounds=list(zip(lo, up)),
        method="highs",
    )
    return float(result.fun) if result.status == 0 else None
