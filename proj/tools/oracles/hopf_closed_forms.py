"""Closed forms for the diagonal Hopf family, derived with sympy.

Prints J(p, a, b), det(I + J), det(I - J), the angle -tr(IJ)/4 and the Lee
form of omega_I for a profile with p(0) = p, p'(0) = s. The output is frozen
into tests/test_oracles.cpp.

    python3 tools/oracles/hopf_closed_forms.py
"""
import sympy as sp

p, a, b, s = sp.symbols("p a b s", real=True)
X = sp.symbols("x1 y1 x2 y2", real=True)
x1, y1, x2, y2 = X
i = sp.I


def conj(M):
    return M.applyfunc(sp.conjugate)


def complex_structure():
    dw1 = sp.Matrix([[1, i, 0, 0]])
    dw2 = sp.Matrix([[0, 0, 1, i]])
    e1 = dw1 - (a / b) * conj(dw2)
    e2 = (b * (1 + p) / (2 * a)) * conj(dw1) + ((1 - p) / 2) * dw2
    E = sp.Matrix.vstack(e1, e2, conj(e1), conj(e2))
    D = sp.diag(-i, -i, i, i)
    return (E.inv() * D * E).applyfunc(lambda z: sp.simplify(sp.re(sp.expand_complex(z))))


def lee_form_I():
    P = sp.Function("P")
    t = 2 * ((b / a) * x1 - x2)
    pt = P(t)
    g11 = b * (1 + pt) / (2 * a)
    g22 = a * (1 - pt) / (2 * b)
    g = sp.diag(g11, g11, g22, g22)
    om = I0.T * g
    om = (om - om.T) / 2

    def d_om(j, k, l):
        return sp.diff(om[k, l], X[j]) + sp.diff(om[l, j], X[k]) + sp.diff(om[j, k], X[l])

    th = sp.symbols("th0:4")
    eqs = [
        sp.Eq(th[j] * om[k, l] + th[k] * om[l, j] + th[l] * om[j, k], d_om(j, k, l))
        for (j, k, l) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
    ]
    sol = sp.solve(eqs, th, dict=True)[0]
    out = []
    for j in range(4):
        e = sol[th[j]].replace(lambda z: isinstance(z, sp.Subs), lambda z: s)
        e = e.subs(sp.Derivative(pt, x1), s * 2 * b / a).subs(sp.Derivative(pt, x2), -2 * s)
        out.append(sp.simplify(e.subs(pt, p)))
    return out


I0 = sp.zeros(4)
I0[1, 0], I0[0, 1], I0[3, 2], I0[2, 3] = 1, -1, 1, -1

J = complex_structure()
assert sp.simplify(J * J + sp.eye(4)) == sp.zeros(4)
print("J =", J)
print("det(I+J) =", sp.factor(sp.simplify((I0 + J).det())))
print("det(I-J) =", sp.factor(sp.simplify((I0 - J).det())))
print("angle =", sp.simplify(-(I0 * J).trace() / 4))
print("theta_I =", lee_form_I())

# Poisson tensor: S = 1/2 [I, J] g^{-1} as the map xi -> sigma(xi, .), and the
# coefficient sigma_I(dw1, dw2) of sigma_I = sigma - i I sigma.
g = sp.diag(*([b * (1 + p) / (2 * a)] * 2 + [a * (1 - p) / (2 * b)] * 2))
S = sp.simplify((I0 * J - J * I0) * g.inv() / 2)
print("S =", S)
C = S.T + i * (-(I0 * S)).T
w1 = sp.Matrix([1, i, 0, 0])
w2 = sp.Matrix([0, 0, 1, i])
print("sigma_I(dw1, dw2) =", sp.simplify((w1.T * C * w2)[0]))
