"""Design the shipped example envelopes.

Envelope synthesis is not part of envcert. This helper reproduces the shipped
problem files: it places the closed-loop poles of the sampled linearization,
takes the eigenvector matrix P as state generators, and scales the envelope
{(P lam, K P lam)} until it fits inside the constraint boxes. Everything is
rationalized before it is written.

    python scripts/design_envelope.py problems/
"""

import argparse
import json
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.linalg import expm
from scipy.signal import place_poles


def _rat(x, den=1000):
    return str(Fraction(float(x)).limit_denominator(den))


def design(A, B, poles, dt, x_bound, u_bound, fill):
    n, m = B.shape
    M = expm(np.block([[A, B], [np.zeros((m, n + m))]]) * dt)
    Ad, Bd = M[:n, :n], M[:n, n:]
    K = -place_poles(Ad, Bd, poles).gain_matrix
    P = np.linalg.eig(Ad + Bd @ K)[1].real
    P /= np.abs(P).max(axis=0)
    G = np.vstack([P, K @ P])
    hull = np.abs(G).sum(axis=1)
    limits = np.concatenate([x_bound, u_bound])
    G *= fill * (limits / hull).min()
    return G


def problem(name, dynamics, dt, x_bound, u_bound, dist, G, x0_half, config):
    n = len(x_bound)
    return {
        "name": name,
        "dynamics": dynamics,
        "dt": dt,
        "state_box": [[f"-{b}", f"{b}"] for b in x_bound],
        "input_box": [[f"-{b}", f"{b}"] for b in u_bound],
        "disturbance": dist,
        "envelope": {"c": ["0"] * G.shape[0], "G": [[_rat(v) for v in row] for row in G]},
        "X0": {"c": ["0"] * n, "G": [[x0_half if i == j else "0" for j in range(n)] for i in range(n)]},
        "config": config,
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir", type=Path)
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)

    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    B = np.array([[0.0], [1.0]])
    G = design(A, B, [0.8, 0.85], 0.1, np.array([1.0, 1.0]), np.array([1.0]), 0.9)
    di = problem("double integrator", ["x2", "u1"], "1/10", ["1", "1"], ["1"], ["1/10", "1/10"], G, "1/40", {})
    # the second disturbance enters x2; both are ignored in nominal mode
    di["dynamics"] = ["x2 + w1", "u1 + w2"]

    A = np.array([[0.0, -1.0], [0.0, 0.0]])
    G = design(A, B, [0.8, 0.85], 0.1, np.array([0.2, 0.2]), np.array([0.3]), 0.9)
    jet = problem("jet engine", ["-x2 - 3/2*x1^2 - 1/2*x1^3 + w1", "u1"], "1/10", ["1/5", "1/5"], ["3/10"],
                  ["1/40"], G, "1/200", {"picard.truncate": 4})

    for fname, data in (("double_integrator.json", di), ("jet_engine.json", jet)):
        (args.outdir / fname).write_text(json.dumps(data, indent=1) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
