"""Check the bundled model constants before they are used anywhere else.

Shunt matrix orthogonality, diffusion sub-stochasticity and nonnegativity,
saturating contraction norm, rotor weight sum.  Exits non-zero on failure.
"""
import sys

import numpy as np

from dscstab.models import MODEL_NAMES, S_SHUNT, bundled_config


def main() -> int:
    problems = []
    err = float(np.max(np.abs(S_SHUNT.T @ S_SHUNT - np.eye(4))))
    print(f"shunt S: max |S^T S - I| = {err:.1e}, row sums {S_SHUNT.sum(axis=1)}")
    if err > 0:
        problems.append("shunt matrix is not orthogonal")
    for name in MODEL_NAMES:
        cfg = bundled_config(name)
        kind = cfg["kind"]
        if kind == "shunt_mesh":
            rho = float(cfg.get("rho", 1.0))
            print(f"{name}: {cfg['width']}x{cfg['height']} mesh, rho = {rho}")
            if abs(rho) > 1:
                problems.append(f"{name}: |rho| > 1")
        elif kind == "diffusion":
            D = np.array(cfg["D"], dtype=float)
            sums = D.sum(axis=0)
            print(f"{name}: D min entry {D.min()}, column sums {sums}")
            if D.min() < 0 or np.any(sums > 1):
                problems.append(f"{name}: D is not sub-stochastic")
        elif kind == "saturating":
            M = np.array(cfg["M"], dtype=float)
            nrm = float(np.linalg.norm(M, 2))
            print(f"{name}: ||M||_2 = {nrm}, s = {cfg.get('s', 1.0)}")
            if nrm > 1 or not float(cfg.get("s", 1.0)) > 0:
                problems.append(f"{name}: M is not a contraction")
        elif kind == "rotor":
            w = np.abs(np.array(cfg.get("weights", [0.5, 0.5]), dtype=float))
            print(f"{name}: sum |w_j| = {w.sum()}")
            if w.sum() > 1:
                problems.append(f"{name}: connection weights exceed 1")
    for p in problems:
        print("FAIL:", p)
    print("all model constants verified" if not problems else f"{len(problems)} problem(s)")
    return 1 if problems else 0


if __name__ == "__main__":
    sys.exit(main())
