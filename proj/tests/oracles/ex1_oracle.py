"""Independent reference values for the double-integrator example (ex1).

Dynamics in arc length s with canonical controls w0 + |w| = 1:
    t' = w0,  x1' = w,  x2' = x1 * w0,  nu' = |w|
Constraints: t(S) = 1, x2(S) <= 0, nu(S) <= 1.  Cost: -x1(S).

With piecewise-constant controls every interval integrates in closed form,
so the enumeration below involves no ODE solver.

Run:  python3 ex1_oracle.py   (prints the values frozen in the C++ tests)
"""

import itertools
import json

import numpy as np


def rollout(ws, S):
    n = len(ws)
    ds = S / n
    t = x1 = x2 = nu = 0.0
    for w in ws:
        w0 = 1.0 - abs(w)
        x2 += w0 * (x1 * ds + 0.5 * w * ds * ds)
        x1 += w * ds
        t += w0 * ds
        nu += abs(w) * ds
    return t, x1, x2, nu


def brute_force(levels, intervals, w0_min, feas_tol=1e-4):
    best = np.inf
    count = 0
    for ws in itertools.product(levels, repeat=intervals):
        if any(1.0 - abs(w) < w0_min - 1e-12 for w in ws):
            continue
        total_w0 = sum(1.0 - abs(w) for w in ws)
        if total_w0 <= 1e-12:
            continue
        S = 1.0 * intervals / total_w0
        t, x1, x2, nu = rollout(ws, S)
        count += 1
        viol = max(abs(t - 1.0), max(x2, 0.0), max(nu - 1.0, 0.0))
        if viol <= feas_tol:
            best = min(best, -x1)
    return best, count


def isolation_lower_bound(eps, delta):
    # A strict process within d-infinity distance delta of the minimizer must
    # lift x1 from 0 to at least 1 - delta.  With w0 >= eps the slope dx1/dt is
    # at most (1 - eps) / eps, so x2(t2) = int x1 dt >= (1 - delta)^2 eps / (2 (1 - eps)).
    return (1.0 - delta) ** 2 * eps / (2.0 * (1.0 - eps))


def main():
    levels = [0.0, 0.5, 1.0]
    ext, n_ext = brute_force(levels, 4, 0.0)
    strict, n_strict = brute_force(levels, 4, 0.0125)
    out = {
        "extended_cost": ext,
        "extended_evaluated": n_ext,
        "strict_cost": strict,
        "strict_evaluated": n_strict,
        "isolation_lower_bound_eps_0.05_delta_0.1": isolation_lower_bound(0.05, 0.1),
    }
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
