"""Fused collide-force-stream-bounce kernels for D2Q9.

Every backend implements the same update for one time step, reading ``f``
and writing the post-streaming populations into ``fout`` (ping-pong):

1. moments ``rho = sum f``, ``u = (sum c f + F/2) / rho`` with ``F = rho g``
2. BGK relaxation towards the equilibrium at ``varpi * u``
3. second-order (Guo) forcing term evaluated at the equilibrium velocity
4. streaming along ``c_i``; a population whose destination is solid or
   outside a non-periodic edge is reflected into ``OPP[i]`` of its own
   cell (halfway bounce-back)

Kernels return ``(umax2, ix, iy)``: the largest ``|u|^2`` over fluid cells
and where it occurs.  ``umax2`` is ``inf`` if any density is non-finite,
and then ``(ix, iy)`` is the first offending cell.

Solid cells are never written; callers keep them at zero.
"""

import numpy as np

from hlbm import _accel
from hlbm._accel import prange
from hlbm.lattice.d2q9 import C, CX, CY, OPP, W, W0, W1, W2

# value-safe fast-math: reassociation and contraction only, so the
# non-finite density check below is not optimised away
_FASTMATH = {"contract", "reassoc", "nsz", "arcp"}


@_accel.njit(inline="always", fastmath=_FASTMATH)
def _post(fi, w, cx, cy, rho, ex, ey, fx, fy, usq, eF, omega, pre):
    cu = cx * ex + cy * ey
    cF = cx * fx + cy * fy
    feq = w * rho * (1.0 + 3.0 * cu + 4.5 * cu * cu - usq)
    return fi - omega * (fi - feq) + pre * w * (3.0 * (cF - eF) + 9.0 * cu * cF)


@_accel.njit(inline="always", fastmath=_FASTMATH)
def _column(f, fout, solid, varpi, gx, gy, omega, periodic_x, periodic_y, x):
    nx = f.shape[1]
    ny = f.shape[2]
    pre = 1.0 - 0.5 * omega
    w0 = W0
    w1 = W1
    w2 = W2
    umax2 = -1.0
    iy_max = -1
    xp = x + 1
    okxp = True
    if xp == nx:
        xp = 0
        okxp = periodic_x
    xm = x - 1
    okxm = True
    if xm < 0:
        xm = nx - 1
        okxm = periodic_x
    for y in range(ny):
        if solid[x, y]:
            continue
        f0 = f[0, x, y]
        f1 = f[1, x, y]
        f2 = f[2, x, y]
        f3 = f[3, x, y]
        f4 = f[4, x, y]
        f5 = f[5, x, y]
        f6 = f[6, x, y]
        f7 = f[7, x, y]
        f8 = f[8, x, y]
        rho = f0 + f1 + f2 + f3 + f4 + f5 + f6 + f7 + f8
        if not (rho > 0.0 and rho < np.inf):
            return np.inf, y
        jx = f1 - f3 + f5 - f6 - f7 + f8
        jy = f2 - f4 + f5 + f6 - f7 - f8
        fx = rho * gx[x, y]
        fy = rho * gy[x, y]
        ux = (jx + 0.5 * fx) / rho
        uy = (jy + 0.5 * fy) / rho
        u2 = ux * ux + uy * uy
        if u2 > umax2:
            umax2 = u2
            iy_max = y
        vp = varpi[x, y]
        ex = vp * ux
        ey = vp * uy
        usq = 1.5 * (ex * ex + ey * ey)
        eF = ex * fx + ey * fy

        yp = y + 1
        okyp = True
        if yp == ny:
            yp = 0
            okyp = periodic_y
        ym = y - 1
        okym = True
        if ym < 0:
            ym = ny - 1
            okym = periodic_y

        fout[0, x, y] = _post(f0, w0, 0.0, 0.0, rho, ex, ey, fx, fy, usq, eF, omega, pre)
        v = _post(f1, w1, 1.0, 0.0, rho, ex, ey, fx, fy, usq, eF, omega, pre)
        if okxp and not solid[xp, y]:
            fout[1, xp, y] = v
        else:
            fout[3, x, y] = v
        v = _post(f2, w1, 0.0, 1.0, rho, ex, ey, fx, fy, usq, eF, omega, pre)
        if okyp and not solid[x, yp]:
            fout[2, x, yp] = v
        else:
            fout[4, x, y] = v
        v = _post(f3, w1, -1.0, 0.0, rho, ex, ey, fx, fy, usq, eF, omega, pre)
        if okxm and not solid[xm, y]:
            fout[3, xm, y] = v
        else:
            fout[1, x, y] = v
        v = _post(f4, w1, 0.0, -1.0, rho, ex, ey, fx, fy, usq, eF, omega, pre)
        if okym and not solid[x, ym]:
            fout[4, x, ym] = v
        else:
            fout[2, x, y] = v
        v = _post(f5, w2, 1.0, 1.0, rho, ex, ey, fx, fy, usq, eF, omega, pre)
        if okxp and okyp and not solid[xp, yp]:
            fout[5, xp, yp] = v
        else:
            fout[7, x, y] = v
        v = _post(f6, w2, -1.0, 1.0, rho, ex, ey, fx, fy, usq, eF, omega, pre)
        if okxm and okyp and not solid[xm, yp]:
            fout[6, xm, yp] = v
        else:
            fout[8, x, y] = v
        v = _post(f7, w2, -1.0, -1.0, rho, ex, ey, fx, fy, usq, eF, omega, pre)
        if okxm and okym and not solid[xm, ym]:
            fout[7, xm, ym] = v
        else:
            fout[5, x, y] = v
        v = _post(f8, w2, 1.0, -1.0, rho, ex, ey, fx, fy, usq, eF, omega, pre)
        if okxp and okym and not solid[xp, ym]:
            fout[8, xp, ym] = v
        else:
            fout[6, x, y] = v
    return umax2, iy_max


@_accel.njit(fastmath=_FASTMATH)
def _step_serial(f, fout, solid, varpi, gx, gy, omega, periodic_x, periodic_y):
    nx = f.shape[1]
    best = -1.0
    bx = -1
    by = -1
    for x in range(nx):
        m, iy = _column(f, fout, solid, varpi, gx, gy, omega, periodic_x, periodic_y, x)
        if m == np.inf:
            return np.inf, x, iy
        if iy >= 0 and m > best:
            best = m
            bx = x
            by = iy
    return best, bx, by


@_accel.njit(parallel=True, fastmath=_FASTMATH)
def _step_parallel(f, fout, solid, varpi, gx, gy, omega, periodic_x, periodic_y):
    nx = f.shape[1]
    colmax = np.full(nx, -1.0)
    colarg = np.full(nx, -1, dtype=np.int64)
    for x in prange(nx):
        m, iy = _column(f, fout, solid, varpi, gx, gy, omega, periodic_x, periodic_y, x)
        colmax[x] = m
        colarg[x] = iy
    best = -1.0
    bx = -1
    by = -1
    for x in range(nx):
        if colmax[x] == np.inf:
            return np.inf, x, colarg[x]
        if colarg[x] >= 0 and colmax[x] > best:
            best = colmax[x]
            bx = x
            by = colarg[x]
    return best, bx, by


def blocked_links(solid, periodic_x, periodic_y):
    """Boolean (9, nx, ny): fluid cells whose ``c_i`` neighbour is a wall."""
    nx, ny = solid.shape
    out = np.zeros((9,) + solid.shape, dtype=bool)
    xs = np.arange(nx)[:, None]
    ys = np.arange(ny)[None, :]
    for i in range(9):
        xn = xs + C[i, 0]
        yn = ys + C[i, 1]
        outside = np.zeros(solid.shape, dtype=bool)
        if not periodic_x:
            outside |= (xn < 0) | (xn >= nx)
        if not periodic_y:
            outside |= (yn < 0) | (yn >= ny)
        xw = np.broadcast_to(xn % nx, solid.shape)
        yw = np.broadcast_to(yn % ny, solid.shape)
        out[i] = (outside | solid[xw, yw]) & ~solid
    return out


def step_numpy(f, fout, solid, varpi, gx, gy, omega, periodic_x, periodic_y, blocked=None):
    """Vectorised reference path; same contract as the compiled kernels."""
    if blocked is None:
        blocked = blocked_links(solid, periodic_x, periodic_y)
    fluid = ~solid
    rho = f.sum(axis=0)
    bad = fluid & ~(np.isfinite(rho) & (rho > 0))
    if bad.any():
        ix, iy = np.argwhere(bad)[0]
        return np.inf, int(ix), int(iy)
    safe_rho = np.where(fluid, rho, 1.0)
    jx = np.tensordot(CX, f, axes=1)
    jy = np.tensordot(CY, f, axes=1)
    fx = safe_rho * gx
    fy = safe_rho * gy
    ux = (jx + 0.5 * fx) / safe_rho
    uy = (jy + 0.5 * fy) / safe_rho
    u2 = np.where(fluid, ux * ux + uy * uy, -1.0)
    k = int(np.argmax(u2))
    ix, iy = np.unravel_index(k, u2.shape)
    ex = varpi * ux
    ey = varpi * uy
    usq = 1.5 * (ex * ex + ey * ey)
    eF = ex * fx + ey * fy
    cu = CX[:, None, None] * ex + CY[:, None, None] * ey
    cF = CX[:, None, None] * fx + CY[:, None, None] * fy
    w = W[:, None, None]
    feq = w * safe_rho * (1.0 + 3.0 * cu + 4.5 * cu * cu - usq)
    src = (1.0 - 0.5 * omega) * w * (3.0 * (cF - eF) + 9.0 * cu * cF)
    fpost = f - omega * (f - feq) + src
    for i in range(9):
        fout[i] = np.roll(fpost[i], (C[i, 0], C[i, 1]), axis=(0, 1))
    for i in range(9):
        mask = blocked[OPP[i]]
        fout[i][mask] = fpost[OPP[i]][mask]
    fout[:, solid] = 0.0
    return float(u2[ix, iy]), int(ix), int(iy)


def select_step():
    """Return the step callable chosen by the environment flags."""
    if _accel.USE_NUMBA:
        return _step_parallel if _accel.THREADS > 0 else _step_serial
    return None
