"""Positivity horizon of the flow g_s = g_0 + s G on the symmetric soliton.

For an invariant potential phi(t), G = sym(J^T d(d^c phi)) depends on phi''(t)
pointwise, and g_s stays positive for s < 1 / max lambda(-G, g_0). The soliton
for |alpha| = |beta| is p = tanh(t/2). Prints the horizon of sech(t) and of
-sech(t); the value is frozen into tests/test_flow.cpp.

    python3 tools/oracles/positivity_horizon.py
"""
import numpy as np
import scipy.linalg as sl

I0 = np.zeros((4, 4))
I0[1, 0], I0[0, 1], I0[3, 2], I0[2, 3] = 1, -1, 1, -1
DW1 = np.array([1, 1j, 0, 0])
DW2 = np.array([0, 0, 1, 1j])


def complex_structure(a, b, p):
    r = a / b
    e1 = DW1 - r * DW2.conj()
    e2 = (b * (1 + p) / (2 * a)) * DW1.conj() + ((1 - p) / 2) * DW2
    E = np.array([e1, e2, e1.conj(), e2.conj()])
    D = np.diag([-1j, -1j, 1j, 1j])
    return np.real(np.linalg.inv(E) @ D @ E)


def horizon(a, b, profile, phi_tt, ts):
    c = np.array([2 * b / a, 0, -2, 0])  # dt in coordinates
    dc = -c @ I0  # d^c t = -dt o I
    best = np.inf
    for t in ts:
        p = profile(t)
        J = complex_structure(a, b, p)
        g = np.diag([b * (1 + p) / (2 * a)] * 2 + [a * (1 - p) / (2 * b)] * 2)
        # d(phi'(t) d^c t) = phi''(t) dt ^ d^c t
        M = phi_tt(t) * (np.outer(c, dc) - np.outer(dc, c))
        G = J.T @ M
        G = (G + G.T) / 2
        lam = sl.eigh(-G, g, eigvals_only=True).max()
        if lam > 0:
            best = min(best, 1 / lam)
    return best


def sech_tt(t):
    return (1 / np.cosh(t)) * (np.tanh(t) ** 2 - 1 / np.cosh(t) ** 2)


ts = np.linspace(-5, 5, 20001)
tanh_half = lambda t: np.tanh(t / 2)
print("horizon(+sech) = %.7f" % horizon(-1.0, -1.0, tanh_half, sech_tt, ts))
print("horizon(-sech) = %.7f" % horizon(-1.0, -1.0, tanh_half, lambda t: -sech_tt(t), ts))
