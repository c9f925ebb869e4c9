"""Simulation core: RNG streams, normal-law helpers and the target rollout.

This module is written in Cython "pure Python" mode.  The same file runs
either interpreted (fallback) or compiled as an extension module; the build
(see setup.py) compiles it with FP contraction disabled so that both
backends produce bit-identical doubles.  To keep that guarantee, everything
random or transcendental is implemented here from scratch:

* a splittable counter-style RNG (splitmix64 finalizer with per-stream
  increment) -- one uniform consumed per draw, trajectory ``i`` always uses
  the stream derived from ``(root, i)`` regardless of batching or threads;
* the standard normal CDF (series + continued fraction) and its inverse
  (rational first guess refined by one Halley step, ~1e-9 accurate);
* inverse-CDF sampling of interval-truncated normals.

The rollout itself simulates a leg-by-leg rectilinear target inside a convex
theater: truncated-normal leg durations and course changes, specular
reflection on the boundary, cookie-cutter detection checks at sensor ping
times, and contact-driven leg splitting (counter-detection -> avoidance,
detection -> radial escape).  Entry points release the GIL in compiled mode.

Scalar/flag packing used by `simulate_batch` / `simulate_recorded` callers
is defined by the DP_* / IP_* constants at the bottom of this module.
"""

import cython

if cython.compiled:
    from cython.cimports.libc.math import asin, atan2, cos, exp, log, sin, sqrt
else:
    from math import asin, atan2, cos, exp, log, sin, sqrt

U64 = cython.declare(cython.ulonglong, 0xFFFFFFFFFFFFFFFF)
GOLDEN = cython.declare(cython.ulonglong, 0x9E3779B97F4A7C15)
MIX_A = cython.declare(cython.ulonglong, 0xBF58476D1CE4E5B9)
MIX_B = cython.declare(cython.ulonglong, 0x94D049BB133111EB)
SALT_STATE = cython.declare(cython.ulonglong, 0xD1B54A32D192ED03)
SALT_GAMMA = cython.declare(cython.ulonglong, 0x8CB92BA72F3D8DD7)

INV_2_53 = cython.declare(cython.double, 1.1102230246251565e-16)
PI = cython.declare(cython.double, 3.141592653589793)
TWO_PI = cython.declare(cython.double, 6.283185307179586)
INV_SQRT2 = cython.declare(cython.double, 0.7071067811865476)
INV_SQRT_PI = cython.declare(cython.double, 0.5641895835477563)
TWO_OVER_SQRT_PI = cython.declare(cython.double, 1.1283791670955126)
INV_SQRT_2PI = cython.declare(cython.double, 0.3989422804014327)

DT_FLOOR = cython.declare(cython.double, 1e-9)
EDGE_EPS = cython.declare(cython.double, 1e-9)
VN_EPS = cython.declare(cython.double, 1e-15)
MAX_STEPS = cython.declare(cython.longlong, 1000000)


# ---------------------------------------------------------------------------
# RNG: splitmix-style stream identified by (state, gamma).
# Advancing is `state = (state + gamma) & U64`; output is mix64(state).
# ---------------------------------------------------------------------------

@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _mix64(z: cython.ulonglong) -> cython.ulonglong:
    z = (z ^ (z >> 30)) * MIX_A & U64
    z = (z ^ (z >> 27)) * MIX_B & U64
    return z ^ (z >> 31)


@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _stream_state(root: cython.ulonglong, k: cython.ulonglong) -> cython.ulonglong:
    return _mix64((root ^ SALT_STATE) + (k + 1) * GOLDEN & U64)


@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _stream_gamma(root: cython.ulonglong, k: cython.ulonglong) -> cython.ulonglong:
    return _mix64(_stream_state(root, k) ^ SALT_GAMMA) | 1


@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _u01(state: cython.ulonglong) -> cython.double:
    # strictly inside (0, 1): safe as a quantile argument
    return ((_mix64(state) >> 11) + 0.5) * INV_2_53


# ---------------------------------------------------------------------------
# Standard normal CDF / quantile.
# ---------------------------------------------------------------------------

@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _erfc(z: cython.double) -> cython.double:
    # z >= 0 only.  Series below 5, Laplace continued fraction above.
    s: cython.double
    term: cython.double
    r: cython.double
    k: cython.int
    if z > 26.5:
        return 0.0
    if z <= 5.0:
        # erf(z) = 2z exp(-z^2)/sqrt(pi) * sum_k (2z^2)^k / (1*3*...*(2k+1))
        z2: cython.double = 2.0 * z * z
        s = 1.0
        term = 1.0
        k = 0
        while True:
            term = term * z2 / (2.0 * k + 3.0)
            s += term
            k += 1
            if term < 1e-17 * s or k > 200:
                break
        return 1.0 - TWO_OVER_SQRT_PI * z * exp(-z * z) * s
    # erfc(z) = exp(-z^2)/sqrt(pi) * 1/(z+ (1/2)/(z+ (2/2)/(z+ (3/2)/(z+ ...))))
    r = 0.0
    k = 40
    while k >= 1:
        r = (0.5 * k) / (z + r)
        k -= 1
    return exp(-z * z) * INV_SQRT_PI / (z + r)


@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _ndtr(x: cython.double) -> cython.double:
    z: cython.double = x * INV_SQRT2
    if z >= 0.0:
        return 1.0 - 0.5 * _erfc(z)
    return 0.5 * _erfc(-z)


@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _ndtri(p: cython.double) -> cython.double:
    # rational lower-tail guess (|err| < 4.5e-4), then one Halley step
    q: cython.double = p
    if q > 0.5:
        q = 1.0 - p
    if q <= 0.0:
        return -38.5 if p <= 0.5 else 38.5
    t: cython.double = sqrt(-2.0 * log(q))
    x: cython.double = t - (2.515517 + t * (0.802853 + t * 0.010328)) / (
        1.0 + t * (1.432788 + t * (0.189269 + t * 0.001308))
    )
    if p <= 0.5:
        x = -x
    if x > 37.5 or x < -37.5:
        return x
    pdf: cython.double = INV_SQRT_2PI * exp(-0.5 * x * x)
    if pdf < 1e-300:
        return x
    u: cython.double = (_ndtr(x) - p) / pdf
    return x - u / (1.0 + 0.5 * x * u)


@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _tn_sample(
    mean: cython.double,
    sd: cython.double,
    lo: cython.double,
    hi: cython.double,
    pa: cython.double,
    pb: cython.double,
    u: cython.double,
) -> cython.double:
    # inverse-CDF draw on [lo, hi]; pa/pb are the CDF values at the bounds
    x: cython.double
    if sd <= 0.0:
        x = mean
    else:
        x = mean + sd * _ndtri(pa + u * (pb - pa))
    if x < lo:
        x = lo
    if x > hi:
        x = hi
    return x


# ---------------------------------------------------------------------------
# Geometry helpers (convex polygon given as edge origins + outward normals).
# ---------------------------------------------------------------------------

@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _inside(
    px: cython.double,
    py: cython.double,
    ex: cython.double[::1],
    ey: cython.double[::1],
    enx: cython.double[::1],
    eny: cython.double[::1],
) -> cython.bint:
    k: cython.Py_ssize_t
    n: cython.Py_ssize_t = ex.shape[0]
    for k in range(n):
        if (px - ex[k]) * enx[k] + (py - ey[k]) * eny[k] > EDGE_EPS:
            return False
    return True


@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _wrap_pi(a: cython.double) -> cython.double:
    while a > PI:
        a -= TWO_PI
    while a <= -PI:
        a += TWO_PI
    return a


@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _avoid_course(
    px: cython.double,
    py: cython.double,
    heading: cython.double,
    sx: cython.double,
    sy: cython.double,
    rcd: cython.double,
) -> cython.double:
    # Mean avoidance course around a remembered threat: keep course when the
    # ray misses the counter-detection disk, otherwise graze it tangentially
    # on the smaller-turn side; inside the disk, go tangential to the radius.
    dx: cython.double = sx - px
    dy: cython.double = sy - py
    d: cython.double = sqrt(dx * dx + dy * dy)
    out: cython.double
    c1: cython.double
    c2: cython.double
    if d <= rcd or d <= 0.0:
        out = atan2(-dy, -dx)
        c1 = _wrap_pi(out + 0.5 * PI - heading)
        c2 = _wrap_pi(out - 0.5 * PI - heading)
        if (c1 if c1 >= 0.0 else -c1) <= (c2 if c2 >= 0.0 else -c2):
            return heading + c1
        return heading + c2
    ch: cython.double = cos(heading)
    sh: cython.double = sin(heading)
    along: cython.double = ch * dx + sh * dy
    if along <= 0.0:
        return heading
    perp: cython.double = ch * dy - sh * dx
    if (perp if perp >= 0.0 else -perp) >= rcd:
        return heading
    ratio: cython.double = rcd / d
    if ratio > 1.0:
        ratio = 1.0
    phi: cython.double = asin(ratio)
    thc: cython.double = atan2(dy, dx)
    if perp > 0.0:
        return thc - phi
    return thc + phi


# ---------------------------------------------------------------------------
# Trajectory rollout.
# ---------------------------------------------------------------------------

EV_COUNTER = cython.declare(cython.longlong, 1)
EV_DETECT = cython.declare(cython.longlong, 2)


@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _trajectory(
    root: cython.ulonglong,
    idx: cython.ulonglong,
    # theater
    ex: cython.double[::1],
    ey: cython.double[::1],
    enx: cython.double[::1],
    eny: cython.double[::1],
    tris: cython.double[:, ::1],
    tcum: cython.double[::1],
    horizon: cython.double,
    # sensors / pings
    sx: cython.double[::1],
    sy: cython.double[::1],
    r2: cython.double,
    rcd2: cython.double,
    rcd: cython.double,
    pt: cython.double[::1],
    pown: cython.longlong[::1],
    # leg duration law
    mu_dt: cython.double,
    sd_dt: cython.double,
    dt_lo: cython.double,
    dt_hi: cython.double,
    pa_dt: cython.double,
    pb_dt: cython.double,
    # course law
    sd_beta: cython.double,
    a_beta: cython.double,
    pa_beta: cython.double,
    pb_beta: cython.double,
    a_escape: cython.double,
    # speed law
    sp_mean: cython.double,
    sp_sd: cython.double,
    sp_lo: cython.double,
    sp_hi: cython.double,
    pa_sp: cython.double,
    pb_sp: cython.double,
    # initial state laws
    init_gauss: cython.bint,
    init_cx: cython.double,
    init_cy: cython.double,
    init_sd: cython.double,
    course_fixed: cython.bint,
    course0: cython.double,
    memory_initial: cython.bint,
    reactive: cython.bint,
    resample_speed: cython.bint,
    # scoring rules
    min_det: cython.longlong,
    max_avoid: cython.longlong,
    early_exit: cython.bint,
    # record buffers (len 0 disables recording)
    rec_t: cython.double[::1],
    rec_x: cython.double[::1],
    rec_y: cython.double[::1],
    rec_vx: cython.double[::1],
    rec_vy: cython.double[::1],
    ev_t: cython.double[::1],
    ev_sn: cython.longlong[::1],
    ev_kind: cython.longlong[::1],
    # outputs: n_det, n_cd, first_detector, n_wp, n_ev, overflow
    tout: cython.longlong[::1],
) -> cython.longlong:
    st: cython.ulonglong = _stream_state(root, idx)
    gm: cython.ulonglong = _stream_gamma(root, idx)
    u: cython.double
    rec_cap: cython.Py_ssize_t = rec_t.shape[0]
    ev_cap: cython.Py_ssize_t = ev_t.shape[0]
    npings: cython.Py_ssize_t = pt.shape[0]
    nedges: cython.Py_ssize_t = ex.shape[0]
    ntris: cython.Py_ssize_t = tcum.shape[0]

    px: cython.double
    py: cython.double
    tries: cython.int
    tri: cython.Py_ssize_t
    ssq: cython.double

    # initial position
    if init_gauss:
        px = init_cx
        py = init_cy
        tries = 0
        while tries < 64:
            st = (st + gm) & U64
            u = _u01(st)
            px = init_cx + init_sd * _ndtri(u)
            st = (st + gm) & U64
            u = _u01(st)
            py = init_cy + init_sd * _ndtri(u)
            if _inside(px, py, ex, ey, enx, eny):
                break
            tries += 1
        if tries >= 64:
            px = init_cx
            py = init_cy
    else:
        st = (st + gm) & U64
        u = _u01(st)
        tri = 0
        while tri < ntris - 1 and u > tcum[tri]:
            tri += 1
        st = (st + gm) & U64
        ssq = sqrt(_u01(st))
        st = (st + gm) & U64
        u = _u01(st)
        px = tris[tri, 0] * (1.0 - ssq) + tris[tri, 2] * ssq * (1.0 - u) + tris[tri, 4] * ssq * u
        py = tris[tri, 1] * (1.0 - ssq) + tris[tri, 3] * ssq * (1.0 - u) + tris[tri, 5] * ssq * u

    # initial course
    h: cython.double
    if course_fixed:
        h = course0
    else:
        st = (st + gm) & U64
        h = TWO_PI * _u01(st)
    beta0: cython.double = h

    # speed, constant per trajectory unless resampled per leg
    v: cython.double
    if sp_sd <= 0.0:
        v = sp_mean
    else:
        st = (st + gm) & U64
        v = _tn_sample(sp_mean, sp_sd, sp_lo, sp_hi, pa_sp, pb_sp, _u01(st))

    vx: cython.double = v * cos(h)
    vy: cython.double = v * sin(h)

    n_det: cython.longlong = 0
    n_cd: cython.longlong = 0
    first: cython.longlong = -1
    n_wp: cython.Py_ssize_t = 0
    n_ev: cython.Py_ssize_t = 0
    overflow: cython.longlong = 0

    if rec_cap > 0:
        rec_t[0] = 0.0
        rec_x[0] = px
        rec_y[0] = py
        rec_vx[0] = vx
        rec_vy[0] = vy
        n_wp = 1

    t: cython.double = 0.0
    pj: cython.Py_ssize_t = 0
    steps: cython.longlong = 0
    mu: cython.int = 0
    threat: cython.Py_ssize_t = -1
    finished: cython.bint = False
    need_course: cython.bint = False
    event: cython.bint
    final: cython.bint
    mean: cython.double
    dtl: cython.double
    leg_end: cython.double
    t_next: cython.double
    best: cython.double
    te: cython.double
    dd: cython.double
    vn: cython.double
    ddx: cython.double
    ddy: cython.double
    d2: cython.double
    s: cython.Py_ssize_t
    k: cython.Py_ssize_t
    bidx: cython.Py_ssize_t

    while not finished:
        if need_course:
            # new leg after a contact or a completed leg: redraw the course
            if mu == 0:
                mean = beta0 if memory_initial else h
            elif mu == 1:
                mean = _avoid_course(px, py, h, sx[threat], sy[threat], rcd)
            else:
                mean = atan2(py - sy[threat], px - sx[threat])
            if mu == 2:
                st = (st + gm) & U64
                h = mean + (2.0 * _u01(st) - 1.0) * a_escape
            elif sd_beta <= 0.0:
                h = mean
            else:
                st = (st + gm) & U64
                h = _tn_sample(
                    mean, sd_beta, mean - a_beta, mean + a_beta, pa_beta, pb_beta, _u01(st)
                )
            if resample_speed and sp_sd > 0.0:
                st = (st + gm) & U64
                v = _tn_sample(sp_mean, sp_sd, sp_lo, sp_hi, pa_sp, pb_sp, _u01(st))
            vx = v * cos(h)
            vy = v * sin(h)
            if rec_cap > 0:
                if n_wp < rec_cap:
                    rec_t[n_wp] = t
                    rec_x[n_wp] = px
                    rec_y[n_wp] = py
                    rec_vx[n_wp] = vx
                    rec_vy[n_wp] = vy
                    n_wp += 1
                else:
                    overflow = 1
        need_course = True

        if sd_dt <= 0.0:
            dtl = mu_dt
        else:
            st = (st + gm) & U64
            dtl = _tn_sample(mu_dt, sd_dt, dt_lo, dt_hi, pa_dt, pb_dt, _u01(st))
        if dtl < DT_FLOOR:
            dtl = DT_FLOOR
        leg_end = t + dtl
        final = False
        if leg_end >= horizon:
            leg_end = horizon
            final = True

        event = False
        while True:
            steps += 1
            if steps > MAX_STEPS:
                overflow = 1
                finished = True
                break

            # pings due at the current instant
            while pj < npings and pt[pj] <= t:
                s = cython.cast(cython.Py_ssize_t, pown[pj])
                pj += 1
                ddx = px - sx[s]
                ddy = py - sy[s]
                d2 = ddx * ddx + ddy * ddy
                if d2 <= r2:
                    n_det += 1
                    if first < 0:
                        first = s
                    if n_ev < ev_cap:
                        ev_t[n_ev] = t
                        ev_sn[n_ev] = s
                        ev_kind[n_ev] = EV_DETECT
                        n_ev += 1
                    if early_exit and n_det >= min_det and max_avoid < 0:
                        finished = True
                        break
                    if reactive:
                        mu = 2
                        threat = s
                        event = True
                        break
                    if rec_cap > 0 and n_wp < rec_cap:
                        # myopic split-free waypoint keeps events on waypoints
                        rec_t[n_wp] = t
                        rec_x[n_wp] = px
                        rec_y[n_wp] = py
                        rec_vx[n_wp] = vx
                        rec_vy[n_wp] = vy
                        n_wp += 1
                elif reactive and d2 <= rcd2:
                    n_cd += 1
                    if n_ev < ev_cap:
                        ev_t[n_ev] = t
                        ev_sn[n_ev] = s
                        ev_kind[n_ev] = EV_COUNTER
                        n_ev += 1
                    threat = s
                    if mu == 0:
                        mu = 1
                    event = True
                    break
            if finished or event:
                break
            if t >= leg_end:
                break

            t_next = leg_end
            if pj < npings and pt[pj] < t_next:
                t_next = pt[pj]

            # specular reflection if the boundary is reached first
            best = t_next - t + 1.0
            bidx = -1
            for k in range(nedges):
                vn = vx * enx[k] + vy * eny[k]
                if vn > VN_EPS:
                    dd = (ex[k] - px) * enx[k] + (ey[k] - py) * eny[k]
                    te = dd / vn
                    if te < 0.0:
                        te = 0.0
                    if te < best:
                        best = te
                        bidx = k
            if bidx >= 0 and t + best < t_next:
                px += vx * best
                py += vy * best
                t += best
                vn = vx * enx[bidx] + vy * eny[bidx]
                vx -= 2.0 * vn * enx[bidx]
                vy -= 2.0 * vn * eny[bidx]
                h = atan2(vy, vx)
                if rec_cap > 0:
                    if n_wp < rec_cap:
                        rec_t[n_wp] = t
                        rec_x[n_wp] = px
                        rec_y[n_wp] = py
                        rec_vx[n_wp] = vx
                        rec_vy[n_wp] = vy
                        n_wp += 1
                    else:
                        overflow = 1
            else:
                px += vx * (t_next - t)
                py += vy * (t_next - t)
                t = t_next

        if finished:
            break
        if event:
            if t >= horizon:
                break
            continue
        if final:
            break

    if rec_cap > 0 and overflow == 0:
        # terminal waypoint pinned exactly at the horizon
        if n_wp < rec_cap:
            rec_t[n_wp] = horizon
            rec_x[n_wp] = px
            rec_y[n_wp] = py
            rec_vx[n_wp] = vx
            rec_vy[n_wp] = vy
            n_wp += 1
        else:
            overflow = 1

    tout[0] = n_det
    tout[1] = n_cd
    tout[2] = first
    tout[3] = n_wp
    tout[4] = n_ev
    tout[5] = overflow
    if n_det >= min_det and (max_avoid < 0 or n_cd <= max_avoid):
        return 1
    return 0


# ---------------------------------------------------------------------------
# Entry points.
# ---------------------------------------------------------------------------

_EMPTY_F = cython.declare(object, None)


@cython.ccall
def simulate_batch(
    ex: cython.double[::1],
    ey: cython.double[::1],
    enx: cython.double[::1],
    eny: cython.double[::1],
    tris: cython.double[:, ::1],
    tcum: cython.double[::1],
    sx: cython.double[::1],
    sy: cython.double[::1],
    pt: cython.double[::1],
    pown: cython.longlong[::1],
    dp: cython.double[::1],
    ip: cython.longlong[::1],
    root: cython.ulonglong,
    start: cython.ulonglong,
    n: cython.longlong,
    need: cython.longlong,
    first_counts: cython.longlong[::1],
    empty_f: cython.double[::1],
    empty_i: cython.longlong[::1],
    tout: cython.longlong[::1],
):
    """Roll out trajectories ``start .. start+n-1`` and count detected ones.

    ``need`` >= 0 enables early rejection: stop as soon as the final count
    can no longer reach ``need`` detections.  Returns (detected, ran).
    ``first_counts`` (len = sensor count, or 0 to skip) accumulates the
    first-detecting sensor of each detected trajectory.
    """
    horizon: cython.double = dp[0]
    mu_dt: cython.double = dp[1]
    sd_dt: cython.double = dp[2]
    dt_lo: cython.double = dp[3]
    dt_hi: cython.double = dp[4]
    pa_dt: cython.double = dp[5]
    pb_dt: cython.double = dp[6]
    sd_beta: cython.double = dp[7]
    a_beta: cython.double = dp[8]
    pa_beta: cython.double = dp[9]
    pb_beta: cython.double = dp[10]
    a_escape: cython.double = dp[11]
    sp_mean: cython.double = dp[12]
    sp_sd: cython.double = dp[13]
    sp_lo: cython.double = dp[14]
    sp_hi: cython.double = dp[15]
    pa_sp: cython.double = dp[16]
    pb_sp: cython.double = dp[17]
    init_cx: cython.double = dp[18]
    init_cy: cython.double = dp[19]
    init_sd: cython.double = dp[20]
    course0: cython.double = dp[21]
    r2: cython.double = dp[22] * dp[22]
    rcd: cython.double = dp[23]
    rcd2: cython.double = dp[23] * dp[23]

    init_gauss: cython.bint = ip[0] != 0
    course_fixed: cython.bint = ip[1] != 0
    memory_initial: cython.bint = ip[2] != 0
    reactive: cython.bint = ip[3] != 0
    resample_speed: cython.bint = ip[4] != 0
    min_det: cython.longlong = ip[5]
    max_avoid: cython.longlong = ip[6]
    early_exit: cython.bint = ip[7] != 0

    count_first: cython.bint = first_counts.shape[0] > 0
    detected: cython.longlong = 0
    ran: cython.longlong = 0
    i: cython.longlong = 0
    c: cython.longlong

    with cython.nogil:
        while i < n:
            c = _trajectory(
                root, start + cython.cast(cython.ulonglong, i),
                ex, ey, enx, eny, tris, tcum, horizon,
                sx, sy, r2, rcd2, rcd, pt, pown,
                mu_dt, sd_dt, dt_lo, dt_hi, pa_dt, pb_dt,
                sd_beta, a_beta, pa_beta, pb_beta, a_escape,
                sp_mean, sp_sd, sp_lo, sp_hi, pa_sp, pb_sp,
                init_gauss, init_cx, init_cy, init_sd,
                course_fixed, course0, memory_initial, reactive, resample_speed,
                min_det, max_avoid, early_exit,
                empty_f, empty_f, empty_f, empty_f, empty_f,
                empty_f, empty_i, empty_i, tout,
            )
            detected += c
            if c != 0 and count_first:
                first_counts[tout[2]] += 1
            i += 1
            if need >= 0 and detected + (n - i) < need:
                break
        ran = i
    return detected, ran


@cython.ccall
def simulate_recorded(
    ex: cython.double[::1],
    ey: cython.double[::1],
    enx: cython.double[::1],
    eny: cython.double[::1],
    tris: cython.double[:, ::1],
    tcum: cython.double[::1],
    sx: cython.double[::1],
    sy: cython.double[::1],
    pt: cython.double[::1],
    pown: cython.longlong[::1],
    dp: cython.double[::1],
    ip: cython.longlong[::1],
    root: cython.ulonglong,
    idx: cython.ulonglong,
    rec_t: cython.double[::1],
    rec_x: cython.double[::1],
    rec_y: cython.double[::1],
    rec_vx: cython.double[::1],
    rec_vy: cython.double[::1],
    ev_t: cython.double[::1],
    ev_sn: cython.longlong[::1],
    ev_kind: cython.longlong[::1],
    tout: cython.longlong[::1],
):
    """Roll out trajectory ``idx`` recording waypoints and contact events.

    Returns the cost indicator; counts land in ``tout`` (see _trajectory).
    """
    return _trajectory(
        root, idx,
        ex, ey, enx, eny, tris, tcum, dp[0],
        sx, sy, dp[22] * dp[22], dp[23] * dp[23], dp[23], pt, pown,
        dp[1], dp[2], dp[3], dp[4], dp[5], dp[6],
        dp[7], dp[8], dp[9], dp[10], dp[11],
        dp[12], dp[13], dp[14], dp[15], dp[16], dp[17],
        ip[0] != 0, dp[18], dp[19], dp[20],
        ip[1] != 0, dp[21], ip[2] != 0, ip[3] != 0, ip[4] != 0,
        ip[5], ip[6], False,
        rec_t, rec_x, rec_y, rec_vx, rec_vy,
        ev_t, ev_sn, ev_kind, tout,
    )


# ---------------------------------------------------------------------------
# Small wrappers reused by the Python layers (single source of truth).
# ---------------------------------------------------------------------------

@cython.ccall
def mix64(z: cython.ulonglong) -> cython.ulonglong:
    return _mix64(z)


@cython.ccall
def stream_state(root: cython.ulonglong, k: cython.ulonglong) -> cython.ulonglong:
    return _stream_state(root, k)


@cython.ccall
def stream_gamma(root: cython.ulonglong, k: cython.ulonglong) -> cython.ulonglong:
    return _stream_gamma(root, k)


@cython.ccall
def u01(state: cython.ulonglong) -> cython.double:
    return _u01(state)


@cython.ccall
def normal_cdf(x: cython.double) -> cython.double:
    return _ndtr(x)


@cython.ccall
def normal_quantile(p: cython.double) -> cython.double:
    return _ndtri(p)


@cython.ccall
def truncated_normal(
    mean: cython.double,
    sd: cython.double,
    lo: cython.double,
    hi: cython.double,
    u: cython.double,
) -> cython.double:
    pa: cython.double = 0.0
    pb: cython.double = 1.0
    if sd > 0.0:
        pa = _ndtr((lo - mean) / sd)
        pb = _ndtr((hi - mean) / sd)
    return _tn_sample(mean, sd, lo, hi, pa, pb, u)


@cython.ccall
def avoid_course(
    px: cython.double,
    py: cython.double,
    heading: cython.double,
    sx: cython.double,
    sy: cython.double,
    rcd: cython.double,
) -> cython.double:
    return _avoid_course(px, py, heading, sx, sy, rcd)


@cython.ccall
def point_inside(
    px: cython.double,
    py: cython.double,
    ex: cython.double[::1],
    ey: cython.double[::1],
    enx: cython.double[::1],
    eny: cython.double[::1],
) -> cython.bint:
    return _inside(px, py, ex, ey, enx, eny)


def backend_name():
    """'compiled' when running as the built extension, else 'interpreted'."""
    return "compiled" if cython.compiled else "interpreted"


# Scalar packing consumed by simulate_batch / simulate_recorded.
DP_HORIZON = 0
DP_MU_DT = 1
DP_SD_DT = 2
DP_DT_LO = 3
DP_DT_HI = 4
DP_PA_DT = 5
DP_PB_DT = 6
DP_SD_BETA = 7
DP_A_BETA = 8
DP_PA_BETA = 9
DP_PB_BETA = 10
DP_A_ESCAPE = 11
DP_SP_MEAN = 12
DP_SP_SD = 13
DP_SP_LO = 14
DP_SP_HI = 15
DP_PA_SP = 16
DP_PB_SP = 17
DP_INIT_CX = 18
DP_INIT_CY = 19
DP_INIT_SD = 20
DP_COURSE0 = 21
DP_RADIUS = 22
DP_RADIUS_CD = 23
DP_SIZE = 24

IP_INIT_GAUSS = 0
IP_COURSE_FIXED = 1
IP_MEMORY_INITIAL = 2
IP_REACTIVE = 3
IP_RESAMPLE_SPEED = 4
IP_MIN_DET = 5
IP_MAX_AVOID = 6
IP_EARLY_EXIT = 7
IP_SIZE = 8

EVENT_COUNTER_DETECTION = 1
EVENT_DETECTION = 2
