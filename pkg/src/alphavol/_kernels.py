"""Compiled inner loops for the alpha-hull structure.

Everything here works on flat arrays so that the Python layer can stay
declarative. All kernels release the GIL.
"""

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-9
TANGENT_TOL = 1e-9


@njit(cache=True, nogil=True)
def _cell(v, o, cs, n):
    c = int(math.floor((v - o) / cs))
    if c < 0:
        return 0
    if c > n - 1:
        return n - 1
    return c


@njit(cache=True, nogil=True)
def _uncovered_gaps(bs, be, k, gs, ge):
    """Gaps of [0, 2pi) left by k linear pieces (bs, be). Returns gap count."""
    order = np.argsort(bs[:k])
    pos = 0.0
    ng = 0
    for t in range(k):
        s = bs[order[t]]
        e = be[order[t]]
        if s > pos:
            gs[ng] = pos
            ge[ng] = s
            ng += 1
        if e > pos:
            pos = e
    if pos < TWO_PI:
        gs[ng] = pos
        ge[ng] = TWO_PI
        ng += 1
    # a gap touching both 0 and 2pi is one arc across the origin
    if ng >= 2 and gs[0] <= 0.0 and ge[ng - 1] >= TWO_PI:
        gs[0] = gs[ng - 1]
        ge[0] = TWO_PI + ge[0]
        ng -= 1
    return ng


@njit(cache=True, nogil=True)
def free_arcs(pts, alpha, ox, oy, cs, nx, ny, cell_start, items):
    """Uncovered arcs of every circle of radius alpha around the sample.

    Returns (owner, start, extent); extent == 2pi marks a full circle.
    """
    n = pts.shape[0]
    cap = 2 * n + 16
    owner = np.empty(cap, np.int64)
    start = np.empty(cap)
    extent = np.empty(cap)
    na = 0
    bufcap = 64
    bs = np.empty(bufcap)
    be = np.empty(bufcap)
    gs = np.empty(bufcap + 2)
    ge = np.empty(bufcap + 2)
    lim2 = (2.0 * alpha - TANGENT_TOL) ** 2
    for i in range(n):
        xi = pts[i, 0]
        yi = pts[i, 1]
        ci = _cell(xi, ox, cs, nx)
        cj = _cell(yi, oy, cs, ny)
        # stages 0, 1: close neighbours only (each covers > 150 degrees); a
        # full cover there is final. stage 2: every neighbour closer than 2 alpha.
        for stage in range(3):
            reach = 1 if stage < 2 else 2
            if stage == 0:
                dlim2 = (0.25 * alpha) ** 2
            elif stage == 1:
                dlim2 = (0.5 * alpha) ** 2
            else:
                dlim2 = lim2
            k = 0
            for a in range(max(ci - reach, 0), min(ci + reach, nx - 1) + 1):
                for b in range(max(cj - reach, 0), min(cj + reach, ny - 1) + 1):
                    key = a * ny + b
                    for t in range(cell_start[key], cell_start[key + 1]):
                        j = items[t]
                        if j == i:
                            continue
                        dx = pts[j, 0] - xi
                        dy = pts[j, 1] - yi
                        d2 = dx * dx + dy * dy
                        if d2 >= dlim2 or d2 <= 0.0:
                            continue
                        d = math.sqrt(d2)
                        half = math.acos(min(1.0, d / (2.0 * alpha)))
                        s = math.atan2(dy, dx) - half
                        s = s % TWO_PI
                        e = s + 2.0 * half
                        if k + 2 > bufcap:
                            bufcap *= 2
                            nbs = np.empty(bufcap)
                            nbe = np.empty(bufcap)
                            nbs[:k] = bs[:k]
                            nbe[:k] = be[:k]
                            bs = nbs
                            be = nbe
                            gs = np.empty(bufcap + 2)
                            ge = np.empty(bufcap + 2)
                        if e > TWO_PI:
                            bs[k] = s
                            be[k] = TWO_PI
                            k += 1
                            bs[k] = 0.0
                            be[k] = e - TWO_PI
                            k += 1
                        else:
                            bs[k] = s
                            be[k] = e
                            k += 1
            if stage < 2:
                if k >= 3:
                    ng = _uncovered_gaps(bs, be, k, gs, ge)
                    covered = True
                    for g in range(ng):
                        if ge[g] - gs[g] > ANGLE_TOL:
                            covered = False
                    if covered:
                        break
                continue
            if k == 0:
                ng = 1
                gs[0] = 0.0
                ge[0] = TWO_PI
            else:
                ng = _uncovered_gaps(bs, be, k, gs, ge)
        if stage < 2:
            continue
        for g in range(ng):
            ext = ge[g] - gs[g]
            if ext <= ANGLE_TOL:
                continue
            if na >= cap:
                cap *= 2
                no = np.empty(cap, np.int64)
                ns = np.empty(cap)
                ne = np.empty(cap)
                no[:na] = owner[:na]
                ns[:na] = start[:na]
                ne[:na] = extent[:na]
                owner = no
                start = ns
                extent = ne
            owner[na] = i
            start[na] = gs[g] % TWO_PI if ext < TWO_PI else 0.0
            extent[na] = min(ext, TWO_PI)
            na += 1
    return owner[:na], start[:na], extent[:na]


@njit(cache=True, nogil=True)
def arc_distance(x, y, alpha, cx, cy, sx, sy, ex, ey, ext):
    """Euclidean distance from (x, y) to one arc of radius alpha."""
    ux = x - cx
    uy = y - cy
    r = math.sqrt(ux * ux + uy * uy)
    if ext >= TWO_PI or r == 0.0:
        return abs(alpha - r)
    c1 = sx * uy - sy * ux
    c2 = ux * ey - uy * ex
    if ext <= math.pi:
        inside = c1 >= 0.0 and c2 >= 0.0
    else:
        inside = not (c1 < 0.0 and c2 < 0.0)
    if inside:
        return abs(alpha - r)
    dsx = ux - alpha * sx
    dsy = uy - alpha * sy
    dex = ux - alpha * ex
    dey = uy - alpha * ey
    return math.sqrt(min(dsx * dsx + dsy * dsy, dex * dex + dey * dey))


@njit(cache=True, nogil=True)
def near_sample(x, y, alpha, pts, ox, oy, cs, nx, ny, cell_start, items):
    """True iff some sample point lies at distance < alpha."""
    a2 = alpha * alpha
    ci = int(math.floor((x - ox) / cs))
    cj = int(math.floor((y - oy) / cs))
    if ci < -1 or cj < -1 or ci > nx or cj > ny:
        return False
    # own cell first: it is the likeliest hit
    if 0 <= ci < nx and 0 <= cj < ny:
        key = ci * ny + cj
        for t in range(cell_start[key], cell_start[key + 1]):
            j = items[t]
            dx = pts[j, 0] - x
            dy = pts[j, 1] - y
            if dx * dx + dy * dy < a2:
                return True
    for a in range(max(ci - 1, 0), min(ci + 1, nx - 1) + 1):
        for b in range(max(cj - 1, 0), min(cj + 1, ny - 1) + 1):
            if a == ci and b == cj:
                continue
            key = a * ny + b
            for t in range(cell_start[key], cell_start[key + 1]):
                j = items[t]
                dx = pts[j, 0] - x
                dy = pts[j, 1] - y
                if dx * dx + dy * dy < a2:
                    return True
    return False


@njit(cache=True, nogil=True)
def capped_clearance(x, y, cap, alpha, pts, pgrid, pcell_start, pitems, occ, ogrid,
                     arcs, agrid, acell_start, aitems):
    """min(dist((x, y), F), cap) where F is the free-centre region.

    pgrid / ogrid / agrid pack (origin_x, origin_y, cell_size, nx, ny) as floats.
    occ flags occupied cells of a raster whose cell diagonal is below alpha.
    arcs columns: cx, cy, sx, sy, ex, ey, extent.
    """
    oi = int(math.floor((x - ogrid[0]) / ogrid[2]))
    oj = int(math.floor((y - ogrid[1]) / ogrid[2]))
    onx = int(ogrid[3])
    ony = int(ogrid[4])
    hit = 0 <= oi < onx and 0 <= oj < ony and occ[oi * ony + oj]
    if not hit and not near_sample(x, y, alpha, pts, pgrid[0], pgrid[1], pgrid[2],
                                   int(pgrid[3]), int(pgrid[4]), pcell_start, pitems):
        return 0.0
    best = cap
    ox = agrid[0]
    oy = agrid[1]
    cs = agrid[2]
    nx = int(agrid[3])
    ny = int(agrid[4])
    i0 = int(math.floor((x - cap - ox) / cs))
    i1 = int(math.floor((x + cap - ox) / cs))
    j0 = int(math.floor((y - cap - oy) / cs))
    j1 = int(math.floor((y + cap - oy) / cs))
    for a in range(max(i0, 0), min(i1, nx - 1) + 1):
        for b in range(max(j0, 0), min(j1, ny - 1) + 1):
            key = a * ny + b
            for t in range(acell_start[key], acell_start[key + 1]):
                k = aitems[t]
                d = arc_distance(x, y, alpha, arcs[k, 0], arcs[k, 1], arcs[k, 2], arcs[k, 3],
                                 arcs[k, 4], arcs[k, 5], arcs[k, 6])
                if d < best:
                    best = d
    return best


@njit(cache=True, nogil=True)
def clearance_many(q, cap, alpha, pts, pgrid, pcell_start, pitems, occ, ogrid,
                   arcs, agrid, acell_start, aitems):
    out = np.empty(q.shape[0])
    for i in range(q.shape[0]):
        out[i] = capped_clearance(q[i, 0], q[i, 1], cap, alpha, pts, pgrid, pcell_start, pitems,
                                  occ, ogrid, arcs, agrid, acell_start, aitems)
    return out


@njit(cache=True, nogil=True)
def classify_cells(cx, cy, rho, alpha, pts, pgrid, pcell_start, pitems, occ, ogrid,
                   arcs, agrid, acell_start, aitems):
    """1 = cell inside the hull, 0 = outside, 2 = undecided (1-Lipschitz test)."""
    m = cx.shape[0]
    status = np.empty(m, np.int8)
    cap = alpha + rho
    for i in range(m):
        c = capped_clearance(cx[i], cy[i], cap, alpha, pts, pgrid, pcell_start, pitems,
                             occ, ogrid, arcs, agrid, acell_start, aitems)
        if c >= alpha + rho:
            status[i] = 1
        elif c + rho < alpha:
            status[i] = 0
        else:
            status[i] = 2
    return status


@njit(cache=True, nogil=True)
def outside_polygon(cx, cy, hx, hy, verts):
    """True where all four corners of the cell lie strictly outside one polygon edge."""
    m = cx.shape[0]
    nv = verts.shape[0]
    out = np.zeros(m, np.bool_)
    for i in range(m):
        for e in range(nv):
            ax = verts[e, 0]
            ay = verts[e, 1]
            bx = verts[(e + 1) % nv, 0]
            by = verts[(e + 1) % nv, 1]
            dx = bx - ax
            dy = by - ay
            allout = True
            for sx in (-1.0, 1.0):
                for sy in (-1.0, 1.0):
                    px = cx[i] + sx * hx - ax
                    py = cy[i] + sy * hy - ay
                    if dx * py - dy * px >= 0.0:
                        allout = False
            if allout:
                out[i] = True
                break
    return out


@njit(cache=True, nogil=True)
def _arc_bbox(cx, cy, r, s, ext):
    if ext >= TWO_PI:
        return cx - r, cy - r, cx + r, cy + r
    e = s + ext
    x0 = min(math.cos(s), math.cos(e))
    x1 = max(math.cos(s), math.cos(e))
    y0 = min(math.sin(s), math.sin(e))
    y1 = max(math.sin(s), math.sin(e))
    for q in range(4):
        ang = q * 0.5 * math.pi
        off = (ang - s) % TWO_PI
        if off <= ext:
            c = math.cos(ang)
            sn = math.sin(ang)
            x0 = min(x0, c)
            x1 = max(x1, c)
            y0 = min(y0, sn)
            y1 = max(y1, sn)
    return cx + r * x0, cy + r * y0, cx + r * x1, cy + r * y1


@njit(cache=True, nogil=True)
def arc_grid(arcs, alpha, ox, oy, cs, nx, ny):
    """CSR bucket grid listing each arc in every cell its bounding box touches."""
    na = arcs.shape[0]
    lo = np.empty((na, 4), np.int64)
    counts = np.zeros(nx * ny, np.int64)
    for k in range(na):
        ext = arcs[k, 6]
        s = math.atan2(arcs[k, 3], arcs[k, 2])
        x0, y0, x1, y1 = _arc_bbox(arcs[k, 0], arcs[k, 1], alpha, s, ext)
        i0 = _cell(x0, ox, cs, nx)
        i1 = _cell(x1, ox, cs, nx)
        j0 = _cell(y0, oy, cs, ny)
        j1 = _cell(y1, oy, cs, ny)
        lo[k, 0] = i0
        lo[k, 1] = i1
        lo[k, 2] = j0
        lo[k, 3] = j1
        for a in range(i0, i1 + 1):
            for b in range(j0, j1 + 1):
                counts[a * ny + b] += 1
    cell_start = np.zeros(nx * ny + 1, np.int64)
    for c in range(nx * ny):
        cell_start[c + 1] = cell_start[c] + counts[c]
    fill = cell_start[:-1].copy()
    items = np.empty(cell_start[-1], np.int64)
    for k in range(na):
        for a in range(lo[k, 0], lo[k, 1] + 1):
            for b in range(lo[k, 2], lo[k, 3] + 1):
                c = a * ny + b
                items[fill[c]] = k
                fill[c] += 1
    return cell_start, items
