"""Reference computations that do not go through the package's own code paths."""

import numpy as np


def dense_system_S(u, p, q, tau, h, a=1.0, b=1.0):
    """Write out system (S) row by row and solve it with a dense LU.

    ``u`` holds u_0..u_{N+1} for a symmetric, unimodal state with N odd.
    Returns (interior solution, tau_n, lambda_n, alpha).
    """
    u = np.asarray(u, dtype=float)
    N = u.size - 2
    m = (N + 1) // 2
    M = np.max(np.abs(u))
    tau_n = tau * min(1.0, M ** (1.0 - p)) if M > 0 else tau
    lam = tau_n / h**2

    alpha = np.zeros(N + 1)  # 1-based
    for i in range(1, N + 1):
        d = abs(u[i + 1] - u[i - 1])
        if q == 1.0:
            alpha[i] = b * tau_n / (2 * h) if d != 0.0 else 0.0
        else:
            alpha[i] = b * tau_n / (2 * h) ** q * d ** (q - 1)

    Q = np.zeros((N, N))
    V = np.zeros(N)
    for i in range(1, N + 1):
        r = i - 1
        Q[r, r] = 1 + 2 * lam
        V[r] = u[i] + tau_n * a * u[i] ** p
        if i < m:
            if i > 1:
                Q[r, r - 1] = -lam - alpha[i]
            Q[r, r + 1] = -lam + alpha[i]
        elif i == m:
            Q[r, r - 1] = -lam
            Q[r, r + 1] = -lam
        else:
            Q[r, r - 1] = -lam + alpha[i]
            if i < N:
                Q[r, r + 1] = -lam - alpha[i]
    return np.linalg.solve(Q, V), tau_n, lam, alpha[1:]


def random_unimodal_state(rng, N, M):
    """Symmetric state on N interior nodes, strictly increasing to the midpoint value M."""
    m = (N + 1) // 2
    steps = rng.uniform(0.2, 1.0, size=m)
    left = np.concatenate(([0.0], np.cumsum(steps)))
    left *= M / left[-1]
    return np.concatenate((left, left[-2::-1]))


def geometric_history(M0, rho, tau, p, n):
    """Exact M_n = M0 rho^n with tau_n = tau M_n^(1-p); returns (t, tau_n, M) arrays."""
    k = np.arange(n + 1)
    M = M0 * rho**k
    tau_n = tau * M ** (1.0 - p)
    t = np.concatenate(([0.0], np.cumsum(tau_n[:-1])))
    return t, tau_n, M
