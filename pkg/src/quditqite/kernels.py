"""Hot loops of the solver.

Every kernel exists twice: an explicit-loop version compiled with numba and
a vectorised numpy version. ``QUDITQITE_NO_NUMBA=1`` selects the numpy
path; both are importable for benchmarking and cross-checking.

Shared arguments: ``amps`` is the (N, d) amplitude array, ``ei``/``ej``/``w``
the edge endpoints and float weights in ascending edge order, ``lam1``,
``lam2``, ``cmax`` the penalty scalars.

Local field: with qudit i forced into level k and every other qudit left
as is, the expected Hamiltonian depends on k only through
``F[i, k] = -sum_j W_ij p_jk + 2 lam2 (S_k - p_ik)``. For a pool generator
pivoting on level l, ``<[G_l, H]> = i m`` with
``m = -2 c_l (sum_k c_k F_k - F_l sum_k c_k)`` and
``<G_l^2> = (d - 1) c_l^2 + (sum_k c_k - c_l)^2``.
"""
import numpy as np

from ._accel import HAVE_NUMBA, njit

DEGENERATE_G2 = 1e-14


# ---------------------------------------------------------------- loop kernels

@njit
def energy_loops(amps, ei, ej, w, lam1, lam2, cmax):
    n, d = amps.shape
    s = np.zeros(d)
    q = np.zeros(d)
    for i in range(n):
        for k in range(d):
            p = amps[i, k] * amps[i, k]
            s[k] += p
            q[k] += p * p
    cut = 0.0
    for e in range(ei.shape[0]):
        a = ei[e]
        b = ej[e]
        same = 0.0
        for k in range(d):
            same += amps[a, k] * amps[a, k] * amps[b, k] * amps[b, k]
        cut += w[e] * (1.0 - same)
    pen = 0.0
    for k in range(d):
        second = s[k] + s[k] * s[k] - q[k]
        pen += -lam1 * (cmax - s[k]) + lam2 * (cmax * cmax - 2.0 * cmax * s[k] + second)
    return cut + pen


@njit
def fields_loops(amps, ei, ej, w, lam2):
    n, d = amps.shape
    f = np.zeros((n, d))
    s = np.zeros(d)
    for i in range(n):
        for k in range(d):
            s[k] += amps[i, k] * amps[i, k]
    for e in range(ei.shape[0]):
        a = ei[e]
        b = ej[e]
        for k in range(d):
            f[a, k] -= w[e] * amps[b, k] * amps[b, k]
            f[b, k] -= w[e] * amps[a, k] * amps[a, k]
    for i in range(n):
        for k in range(d):
            f[i, k] += 2.0 * lam2 * (s[k] - amps[i, k] * amps[i, k])
    return f


@njit
def gradient_table_loops(amps, f):
    """Return ``(m, g2)``, both (N, d), for every qudit and pool level."""
    n, d = amps.shape
    m = np.empty((n, d))
    g2 = np.empty((n, d))
    for i in range(n):
        dot = 0.0
        tot = 0.0
        for k in range(d):
            dot += amps[i, k] * f[i, k]
            tot += amps[i, k]
        for l in range(d):
            c = amps[i, l]
            m[i, l] = -2.0 * c * (dot - f[i, l] * tot)
            r = tot - c
            g2[i, l] = (d - 1) * c * c + r * r
    return m, g2


@njit
def step_loops(amps, ei, ej, w, lam1, lam2, cmax, dtau, sel, coef):
    """One Jacobi step in place. Fills ``sel``/``coef``; returns the pre-step energy."""
    n, d = amps.shape
    s = np.zeros(d)
    q = np.zeros(d)
    f = np.zeros((n, d))
    for i in range(n):
        for k in range(d):
            p = amps[i, k] * amps[i, k]
            s[k] += p
            q[k] += p * p
    cut = 0.0
    for e in range(ei.shape[0]):
        a = ei[e]
        b = ej[e]
        same = 0.0
        for k in range(d):
            pa = amps[a, k] * amps[a, k]
            pb = amps[b, k] * amps[b, k]
            same += pa * pb
            f[a, k] -= w[e] * pb
            f[b, k] -= w[e] * pa
        cut += w[e] * (1.0 - same)
    pen = 0.0
    for k in range(d):
        second = s[k] + s[k] * s[k] - q[k]
        pen += -lam1 * (cmax - s[k]) + lam2 * (cmax * cmax - 2.0 * cmax * s[k] + second)

    omega = np.sqrt(d - 1.0)
    for i in range(n):
        dot = 0.0
        tot = 0.0
        for k in range(d):
            f[i, k] += 2.0 * lam2 * (s[k] - amps[i, k] * amps[i, k])
            dot += amps[i, k] * f[i, k]
            tot += amps[i, k]
        best = 0
        best_abs = -1.0
        best_m = 0.0
        for l in range(d):
            ml = -2.0 * amps[i, l] * (dot - f[i, l] * tot)
            if abs(ml) > best_abs:
                best_abs = abs(ml)
                best = l
                best_m = ml
        c = amps[i, best]
        r = tot - c
        g2 = (d - 1) * c * c + r * r
        a = 0.0
        if g2 >= DEGENERATE_G2:
            a = 0.5 * best_m / g2
        sel[i] = best
        coef[i] = a
        if a != 0.0:
            beta = r / omega
            phi = omega * a * dtau
            cs = np.cos(phi)
            sn = np.sin(phi)
            new_beta = c * sn + beta * cs
            shift = (new_beta - beta) / omega
            for k in range(d):
                amps[i, k] += shift
            amps[i, best] = c * cs - beta * sn
    return cut + pen


@njit
def rounded_cost_loops(amps, ei, ej, w, lam1, lam2, cmax, labels, counts):
    """Round in place into ``labels``/``counts``; return ``(cut, total)``."""
    n, d = amps.shape
    for k in range(d):
        counts[k] = 0
    for i in range(n):
        best = 0
        best_p = amps[i, 0] * amps[i, 0]
        for k in range(1, d):
            p = amps[i, k] * amps[i, k]
            if p > best_p:
                best_p = p
                best = k
        labels[i] = best
        counts[best] += 1
    cut = 0.0
    for e in range(ei.shape[0]):
        if labels[ei[e]] != labels[ej[e]]:
            cut += w[e]
    pen = 0.0
    for k in range(d):
        slack = cmax - counts[k]
        pen += -lam1 * slack + lam2 * slack * slack
    return cut, cut + pen


# --------------------------------------------------------------- numpy kernels

def _neighbor_sum(p, ei, ej, w):
    out = np.zeros_like(p)
    np.add.at(out, ei, w[:, None] * p[ej])
    np.add.at(out, ej, w[:, None] * p[ei])
    return out


def energy_numpy(amps, ei, ej, w, lam1, lam2, cmax):
    p = amps * amps
    s = p.sum(axis=0)
    q = (p * p).sum(axis=0)
    cut = float(np.sum(w * (1.0 - np.sum(p[ei] * p[ej], axis=1))))
    second = s + s * s - q
    pen = float(np.sum(-lam1 * (cmax - s) + lam2 * (cmax * cmax - 2.0 * cmax * s + second)))
    return cut + pen


def fields_numpy(amps, ei, ej, w, lam2):
    p = amps * amps
    s = p.sum(axis=0)
    return -_neighbor_sum(p, ei, ej, w) + 2.0 * lam2 * (s[None, :] - p)


def gradient_table_numpy(amps, f):
    d = amps.shape[1]
    dot = np.sum(amps * f, axis=1, keepdims=True)
    tot = np.sum(amps, axis=1, keepdims=True)
    m = -2.0 * amps * (dot - f * tot)
    g2 = (d - 1) * amps * amps + (tot - amps) ** 2
    return m, g2


def step_numpy(amps, ei, ej, w, lam1, lam2, cmax, dtau, sel, coef):
    n, d = amps.shape
    energy = energy_numpy(amps, ei, ej, w, lam1, lam2, cmax)
    m, g2 = gradient_table_numpy(amps, fields_numpy(amps, ei, ej, w, lam2))
    rows = np.arange(n)
    best = np.argmax(np.abs(m), axis=1)
    mb = m[rows, best]
    gb = g2[rows, best]
    a = np.zeros(n)
    ok = gb >= DEGENERATE_G2
    a[ok] = 0.5 * mb[ok] / gb[ok]
    sel[:] = best
    coef[:] = a
    omega = np.sqrt(d - 1.0)
    c = amps[rows, best]
    r = amps.sum(axis=1) - c
    beta = r / omega
    phi = omega * a * dtau
    cs, sn = np.cos(phi), np.sin(phi)
    shift = (c * sn + beta * cs - beta) / omega
    moved = a != 0.0
    amps[moved] += shift[moved, None]
    amps[rows[moved], best[moved]] = (c * cs - beta * sn)[moved]
    return energy


def rounded_cost_numpy(amps, ei, ej, w, lam1, lam2, cmax, labels, counts):
    d = amps.shape[1]
    labels[:] = np.argmax(amps * amps, axis=1)
    counts[:] = np.bincount(labels, minlength=d)
    cut = float(np.sum(w[labels[ei] != labels[ej]]))
    slack = cmax - counts.astype(np.float64)
    pen = float(np.sum(-lam1 * slack + lam2 * slack * slack))
    return cut, cut + pen


LOOP_KERNELS = {
    "energy": energy_loops,
    "fields": fields_loops,
    "gradient_table": gradient_table_loops,
    "step": step_loops,
    "rounded_cost": rounded_cost_loops,
}
NUMPY_KERNELS = {
    "energy": energy_numpy,
    "fields": fields_numpy,
    "gradient_table": gradient_table_numpy,
    "step": step_numpy,
    "rounded_cost": rounded_cost_numpy,
}
ACTIVE = LOOP_KERNELS if HAVE_NUMBA else NUMPY_KERNELS

energy = ACTIVE["energy"]
fields = ACTIVE["fields"]
gradient_table = ACTIVE["gradient_table"]
step = ACTIVE["step"]
rounded_cost = ACTIVE["rounded_cost"]


def edge_arrays(instance):
    """Contiguous (ei, ej, w) arrays in ascending edge order."""
    g = instance.graph
    ei = np.ascontiguousarray(g.edges[:, 0], dtype=np.int64)
    ej = np.ascontiguousarray(g.edges[:, 1], dtype=np.int64)
    w = np.ascontiguousarray(g.weights, dtype=np.float64)
    return ei, ej, w
