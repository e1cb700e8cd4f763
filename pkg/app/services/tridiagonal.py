"""Solvers tridiagonais para o passo implícito: Thomas, conjunto ativo e Gauss-Seidel projetado.

A matriz do passo é M = I - (dt/2)·D₂, simétrica, com diagonal constante `diag`
e fora-da-diagonal constante `off` < 0 (M-matriz).
"""

import numpy as np

from app.utils.aceleracao import jit_kernel


@jit_kernel
def thomas(lower, diag, upper, rhs):
    n = rhs.shape[0]
    c = np.empty(n)
    d = np.empty(n)
    x = np.empty(n)
    c[0] = upper[0] / diag[0]
    d[0] = rhs[0] / diag[0]
    for i in range(1, n):
        den = diag[i] - lower[i] * c[i - 1]
        c[i] = upper[i] / den
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / den
    x[n - 1] = d[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


@jit_kernel
def apply_matrix(diag, off, u):
    n = u.shape[0]
    out = np.empty(n)
    for i in range(n):
        s = diag * u[i]
        if i > 0:
            s += off * u[i - 1]
        if i < n - 1:
            s += off * u[i + 1]
        out[i] = s
    return out


@jit_kernel
def solve_constant(diag, off, rhs):
    n = rhs.shape[0]
    lower = np.full(n, off)
    upper = np.full(n, off)
    lower[0] = 0.0
    upper[n - 1] = 0.0
    return thomas(lower, np.full(n, diag), upper, rhs)


@jit_kernel
def lcp_active_set(diag, off, b, max_iter):
    """min(u, Mu - b) = 0 por iteração de políticas.

    Linhas no conjunto ativo viram identidade (u_i = 0); nas demais (Mu)_i = b_i.
    Devolve (u, w, iterações) com w = Mu - b nulo fora do conjunto ativo;
    iterações = -1 quando o limite é atingido.
    """
    n = b.shape[0]
    active = b < 0.0
    lower = np.empty(n)
    dvec = np.empty(n)
    upper = np.empty(n)
    rhs = np.empty(n)
    u = np.zeros(n)
    w = np.zeros(n)
    for it in range(max_iter):
        for i in range(n):
            if active[i]:
                lower[i] = 0.0
                upper[i] = 0.0
                dvec[i] = 1.0
                rhs[i] = 0.0
            else:
                lower[i] = off if i > 0 else 0.0
                upper[i] = off if i < n - 1 else 0.0
                dvec[i] = diag
                rhs[i] = b[i]
        u = thomas(lower, dvec, upper, rhs)
        mu = apply_matrix(diag, off, u)
        changed = False
        for i in range(n):
            if active[i]:
                u[i] = 0.0
                w[i] = mu[i] - b[i]
                if w[i] < 0.0:
                    active[i] = False
                    changed = True
            else:
                w[i] = 0.0
                if u[i] < 0.0:
                    active[i] = True
                    changed = True
        if not changed:
            return u, w, it + 1
    return u, w, -1


@jit_kernel
def penalty_active_set(diag, off, pen, b, max_iter):
    """Resolve Mu + pen·u·1{u<0} = b (penalização implícita, pen = dt/δ)."""
    n = b.shape[0]
    neg = b < 0.0
    lower = np.full(n, off)
    upper = np.full(n, off)
    lower[0] = 0.0
    upper[n - 1] = 0.0
    dvec = np.empty(n)
    u = np.zeros(n)
    for it in range(max_iter):
        for i in range(n):
            dvec[i] = diag + pen if neg[i] else diag
        u = thomas(lower, dvec, upper, b)
        changed = False
        for i in range(n):
            novo = u[i] < 0.0
            if novo != neg[i]:
                neg[i] = novo
                changed = True
        if not changed:
            return u, it + 1
    return u, -1


@jit_kernel
def projected_gauss_seidel(diag, off, pen, b, u0, tol, max_iter):
    """Gauss-Seidel projetado (pen = 0) ou não linear penalizado (pen > 0).

    Devolve (u, varreduras); varreduras = -1 sem convergência.
    """
    n = b.shape[0]
    u = u0.copy()
    for sweep in range(max_iter):
        delta = 0.0
        for i in range(n):
            r = b[i]
            if i > 0:
                r -= off * u[i - 1]
            if i < n - 1:
                r -= off * u[i + 1]
            if pen > 0.0:
                novo = r / diag if r >= 0.0 else r / (diag + pen)
            else:
                novo = max(0.0, r / diag)
            delta = max(delta, abs(novo - u[i]))
            u[i] = novo
        if delta < tol:
            return u, sweep + 1
    return u, -1
