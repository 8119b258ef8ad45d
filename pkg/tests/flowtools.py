"""Time-one Hamiltonian flow by adaptive high-order integration (test oracle)."""
import numpy as np
from scipy.integrate import solve_ivp


def time_one_flow(G, point, rtol=1e-13, atol=1e-16):
    """Flow of x' = dG/dxi, xi' = -dG/dx for unit time; G in the real basis."""
    G = G.as_float()
    n = G.n
    dxi = [G.derivative(n + j) for j in range(n)]
    dx = [G.derivative(j) for j in range(n)]

    def rhs(_, y):
        return np.array([complex(p.evaluate(list(y))) for p in dxi] +
                        [-complex(p.evaluate(list(y))) for p in dx])

    sol = solve_ivp(rhs, (0.0, 1.0), np.asarray(point, dtype=complex), method="DOP853",
                    rtol=rtol, atol=atol)
    assert sol.success
    return sol.y[:, -1]
