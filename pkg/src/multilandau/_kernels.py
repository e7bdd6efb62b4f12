"""Compiled inner loops.

Every parallel loop is over *output* elements; each output is reduced
serially in a fixed index order, so results are bitwise identical for any
thread count.
"""

import math

import numpy as np
from numba import njit, prange

_JIT = dict(cache=True, nogil=True)


@njit(parallel=True, **_JIT)
def log_density_lse(weights, vel, eps, points):
    """log(sum_r w_r exp(-|x - v_r|^2 / 2 eps)) via max-shifted log-sum-exp.

    The Gaussian normalisation constant is NOT included. Zero-weight
    particles are skipped. Returns -inf only if every weight is zero.
    """
    m, d = points.shape
    n = vel.shape[0]
    out = np.empty(m)
    inv2e = 0.5 / eps
    for k in prange(m):
        amax = -np.inf
        for r in range(n):
            w = weights[r]
            if w > 0.0:
                s = 0.0
                for a in range(d):
                    diff = points[k, a] - vel[r, a]
                    s += diff * diff
                val = math.log(w) - s * inv2e
                if val > amax:
                    amax = val
        if amax == -np.inf:
            out[k] = -np.inf
            continue
        acc = 0.0
        for r in range(n):
            w = weights[r]
            if w > 0.0:
                s = 0.0
                for a in range(d):
                    diff = points[k, a] - vel[r, a]
                    s += diff * diff
                acc += math.exp(math.log(w) - s * inv2e - amax)
        out[k] = amax + math.log(acc)
    return out


@njit(parallel=True, **_JIT)
def density_direct(weights, vel, eps, points):
    """sum_r w_r exp(-|x - v_r|^2 / 2 eps) at arbitrary points (unnormalised)."""
    m, d = points.shape
    n = vel.shape[0]
    out = np.empty(m)
    inv2e = 0.5 / eps
    for k in prange(m):
        acc = 0.0
        for r in range(n):
            s = 0.0
            for a in range(d):
                diff = points[k, a] - vel[r, a]
                s += diff * diff
            acc += weights[r] * math.exp(-s * inv2e)
        out[k] = acc
    return out


@njit(parallel=True, **_JIT)
def _axis_factors(coords, vel_axis, eps):
    # g[r, i] = exp(-(coords[i] - vel_axis[r])^2 / 2 eps)
    n = vel_axis.shape[0]
    g = np.empty((n, coords.shape[0]))
    inv2e = 0.5 / eps
    for r in prange(n):
        for i in range(coords.shape[0]):
            diff = coords[i] - vel_axis[r]
            g[r, i] = math.exp(-diff * diff * inv2e)
    return g


@njit(parallel=True, **_JIT)
def _grid_density_2d(weights, gx, gy):
    n = weights.shape[0]
    nx = gx.shape[1]
    ny = gy.shape[1]
    out = np.zeros((nx, ny))
    for i in prange(nx):
        for r in range(n):
            c = weights[r] * gx[r, i]
            if c != 0.0:
                for j in range(ny):
                    out[i, j] += c * gy[r, j]
    return out


@njit(parallel=True, **_JIT)
def _grid_density_3d(weights, gx, gy, gz):
    n = weights.shape[0]
    nx = gx.shape[1]
    ny = gy.shape[1]
    nz = gz.shape[1]
    out = np.zeros((nx, ny, nz))
    for i in prange(nx):
        for r in range(n):
            c = weights[r] * gx[r, i]
            if c != 0.0:
                for j in range(ny):
                    cj = c * gy[r, j]
                    if cj != 0.0:
                        for k in range(nz):
                            out[i, j, k] += cj * gz[r, k]
    return out


def grid_density(weights, vel, eps, axes):
    """Unnormalised mollified density on the tensor grid spanned by ``axes``.

    Returns an array of shape ``(n_1, ..., n_d)``.
    """
    d = len(axes)
    factors = [_axis_factors(axes[a], np.ascontiguousarray(vel[:, a]), eps) for a in range(d)]
    if d == 2:
        return _grid_density_2d(weights, factors[0], factors[1])
    if d == 3:
        return _grid_density_3d(weights, factors[0], factors[1], factors[2])
    raise ValueError(f"unsupported dimension {d}")


@njit(parallel=True, **_JIT)
def _score_2d(ax, ay, logrho, eps, queries):
    q = queries.shape[0]
    nx = ax.shape[0]
    ny = ay.shape[0]
    out = np.zeros((q, 2))
    inv2e = 0.5 / eps
    inve = 1.0 / eps
    for p in prange(q):
        vx = queries[p, 0]
        vy = queries[p, 1]
        gy = np.empty(ny)
        dy = np.empty(ny)
        for j in range(ny):
            t = vy - ay[j]
            gy[j] = math.exp(-t * t * inv2e)
            dy[j] = -t * inve * gy[j]
        fx = 0.0
        fy = 0.0
        for i in range(nx):
            t = vx - ax[i]
            gx = math.exp(-t * t * inv2e)
            if gx == 0.0:
                continue
            s0 = 0.0
            s1 = 0.0
            for j in range(ny):
                lv = logrho[i, j]
                s0 += gy[j] * lv
                s1 += dy[j] * lv
            fx += -t * inve * gx * s0
            fy += gx * s1
        out[p, 0] = fx
        out[p, 1] = fy
    return out


@njit(parallel=True, **_JIT)
def _score_3d(ax, ay, az, logrho, eps, queries):
    q = queries.shape[0]
    nx = ax.shape[0]
    ny = ay.shape[0]
    nz = az.shape[0]
    out = np.zeros((q, 3))
    inv2e = 0.5 / eps
    inve = 1.0 / eps
    for p in prange(q):
        gy = np.empty(ny)
        dy = np.empty(ny)
        gz = np.empty(nz)
        dz = np.empty(nz)
        for j in range(ny):
            t = queries[p, 1] - ay[j]
            gy[j] = math.exp(-t * t * inv2e)
            dy[j] = -t * inve * gy[j]
        for k in range(nz):
            t = queries[p, 2] - az[k]
            gz[k] = math.exp(-t * t * inv2e)
            dz[k] = -t * inve * gz[k]
        fx = 0.0
        fy = 0.0
        fz = 0.0
        for i in range(nx):
            t = queries[p, 0] - ax[i]
            gx = math.exp(-t * t * inv2e)
            if gx == 0.0:
                continue
            sx = 0.0
            sy = 0.0
            sz = 0.0
            for j in range(ny):
                a0 = 0.0
                a1 = 0.0
                for k in range(nz):
                    lv = logrho[i, j, k]
                    a0 += gz[k] * lv
                    a1 += dz[k] * lv
                sx += gy[j] * a0
                sy += dy[j] * a0
                sz += gy[j] * a1
            fx += -t * inve * gx * sx
            fy += gx * sy
            fz += gx * sz
        out[p, 0] = fx
        out[p, 1] = fy
        out[p, 2] = fz
    return out


def grid_score(axes, logrho, eps, queries):
    """Unnormalised sum_h grad(exp(-|v - v_h|^2 / 2 eps)) * logrho_h at each query."""
    d = len(axes)
    if d == 2:
        return _score_2d(axes[0], axes[1], logrho, eps, queries)
    if d == 3:
        return _score_3d(axes[0], axes[1], axes[2], logrho, eps, queries)
    raise ValueError(f"unsupported dimension {d}")


@njit(inline="always")
def _radial(r2, gamma, half_gamma):
    if gamma == 0.0:
        return 1.0
    if gamma == -3.0:
        return 1.0 / (r2 * math.sqrt(r2))
    return r2**half_gamma


@njit(parallel=True, **_JIT)
def _pair_field_2d(vx, vy, gx, gy, weights, offsets, coef, gamma, min_r2):
    n = vx.shape[0]
    s = offsets.shape[0] - 1
    out = np.empty((n, 2))
    half_gamma = 0.5 * gamma
    for p in prange(n):
        sp = 0
        while offsets[sp + 1] <= p:
            sp += 1
        px = vx[p]
        py = vy[p]
        bx0 = gx[p]
        by0 = gy[p]
        ax = 0.0
        ay = 0.0
        for j in range(s):
            cj = coef[sp, j]
            if cj == 0.0:
                continue
            for q in range(offsets[j], offsets[j + 1]):
                zx = px - vx[q]
                zy = py - vy[q]
                r2 = zx * zx + zy * zy
                if q == p or r2 < min_r2:
                    continue
                bx = bx0 - gx[q]
                by = by0 - gy[q]
                c = cj * weights[q] * _radial(r2, gamma, half_gamma)
                zb = zx * bx + zy * by
                ax += c * (r2 * bx - zx * zb)
                ay += c * (r2 * by - zy * zb)
        out[p, 0] = -ax
        out[p, 1] = -ay
    return out


@njit(parallel=True, **_JIT)
def _pair_field_3d(vx, vy, vz, gx, gy, gz, weights, offsets, coef, gamma, min_r2):
    n = vx.shape[0]
    s = offsets.shape[0] - 1
    out = np.empty((n, 3))
    half_gamma = 0.5 * gamma
    for p in prange(n):
        sp = 0
        while offsets[sp + 1] <= p:
            sp += 1
        ax = 0.0
        ay = 0.0
        az = 0.0
        for j in range(s):
            cj = coef[sp, j]
            if cj == 0.0:
                continue
            for q in range(offsets[j], offsets[j + 1]):
                zx = vx[p] - vx[q]
                zy = vy[p] - vy[q]
                zz = vz[p] - vz[q]
                r2 = zx * zx + zy * zy + zz * zz
                if q == p or r2 < min_r2:
                    continue
                bx = gx[p] - gx[q]
                by = gy[p] - gy[q]
                bz = gz[p] - gz[q]
                c = cj * weights[q] * _radial(r2, gamma, half_gamma)
                zb = zx * bx + zy * by + zz * bz
                ax += c * (r2 * bx - zx * zb)
                ay += c * (r2 * by - zy * zb)
                az += c * (r2 * bz - zz * zb)
        out[p, 0] = -ax
        out[p, 1] = -ay
        out[p, 2] = -az
    return out


def pair_velocity_field(vel, weights, offsets, scaled_score, coef, gamma, min_r2):
    """Collisional velocity field of all particles.

    ``out_p = -sum_q w_q coef[s_p, s_q] |z|^gamma (|z|^2 b - z (z . b))`` with
    ``z = v_p - v_q`` and ``b = G_p - G_q`` (``G`` = score / species mass).
    Particles are concatenated by species; ``offsets`` are the block
    boundaries. Sources are visited species-ascending then
    particle-ascending. Self pairs and pairs with ``|z|^2 < min_r2`` are
    skipped.
    """
    d = vel.shape[1]
    cols = [np.ascontiguousarray(vel[:, a]) for a in range(d)]
    gcols = [np.ascontiguousarray(scaled_score[:, a]) for a in range(d)]
    args = (weights, offsets, coef, float(gamma), float(min_r2))
    if d == 2:
        return _pair_field_2d(*cols, *gcols, *args)
    if d == 3:
        return _pair_field_3d(*cols, *gcols, *args)
    raise ValueError(f"unsupported dimension {d}")
