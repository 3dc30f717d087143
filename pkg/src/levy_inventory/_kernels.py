"""Compiled event-driven simulation kernels.

Every path owns a SplitMix64 stream keyed by ``(seed, path_id)``, so results
do not depend on how paths are spread over threads.  Demand between events
grows linearly at the drift rate and all path functionals are integrated in
closed form on those linear pieces.
"""
import math

import numpy as np
from numba import njit, prange

from .model import TIE_RTOL

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_PATH_SALT = np.uint64(0xD1B54A32D192ED03)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_TWO_M53 = 1.0 / 9007199254740992.0

SRC_UNIT = 0
SRC_COMPOUND = 1


@njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def stream_key(seed, path_id):
    """Starting state of the stream for one path."""
    return _mix(_mix(np.uint64(seed)) ^ _mix((np.uint64(path_id) + _ONE) * _PATH_SALT))


@njit(cache=True, inline="always")
def _uniform(state):
    # uniform on (0, 1]; state is a one-element uint64 array
    state[0] += _GOLDEN
    return float((_mix(state[0]) >> _S11) + _ONE) * _TWO_M53


@njit(cache=True, inline="always")
def _exponential(state, rate):
    return -math.log(_uniform(state)) / rate


@njit(cache=True)
def _normal(state):
    # Marsaglia polar method, one variate per call
    while True:
        u = 2.0 * _uniform(state) - 1.0
        v = 2.0 * _uniform(state) - 1.0
        r = u * u + v * v
        if 0.0 < r < 1.0:
            return u * math.sqrt(-2.0 * math.log(r) / r)


@njit(cache=True)
def _standard_gamma(state, shape):
    # Marsaglia-Tsang squeeze; shapes below 1 use G(a) = G(a + 1) U^(1/a)
    boost = 1.0
    if shape < 1.0:
        boost = _uniform(state) ** (1.0 / shape)
        shape += 1.0
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = _normal(state)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = _uniform(state)
        if u < 1.0 - 0.0331 * x * x * x * x:
            return d * v * boost
        if math.log(u) < 0.5 * x * x + d * (1.0 - v + math.log(v)):
            return d * v * boost


@njit(cache=True, inline="always")
def _jump_size(state, shape, rate):
    if shape == 1.0:
        return _exponential(state, rate)
    return _standard_gamma(state, shape) / rate


@njit(cache=True, inline="always")
def _slack(level):
    return TIE_RTOL * max(1.0, abs(level))


@njit(cache=True, inline="always")
def _first_clock(state, rate):
    if rate > 0.0:
        return _exponential(state, rate)
    return math.inf


@njit(cache=True)
def _stockout_area(x0, mu, length):
    """Integral of max(0, -(x0 - mu s)) over s in [0, length]."""
    x1 = x0 - mu * length
    if x0 <= 0.0:
        return -0.5 * (x0 + x1) * length
    if x1 >= 0.0:
        return 0.0
    return 0.5 * (-x1) * (length - x0 / mu)


@njit(cache=True)
def _policy_path(mu, alpha, lam, lam_c, shape, rate, x, a, q, horizon, seed, path_id, out):
    """One inventory path on [0, horizon].

    ``out`` receives R_t (orders at times <= horizon), int X ds, int (-X)^+ ds, int R ds, the sum of order
    times before the horizon and D_t.
    """
    state = np.empty(1, dtype=np.uint64)
    state[0] = stream_key(seed, path_id)
    tau = 0.0
    demand = 0.0
    orders = 0
    level = a
    area = 0.0
    short = 0.0
    order_area = 0.0
    order_times = 0.0
    next_unit = _first_clock(state, lam) if alpha > 0.0 else math.inf
    next_comp = _first_clock(state, lam_c)
    while True:
        event = min(next_unit, next_comp)
        stop = min(event, horizon)
        # drift segment, possibly crossing thresholds
        while mu > 0.0 and demand + mu * (stop - tau) >= level - _slack(level):
            # a crossing exactly at the horizon counts, matching P(D_t >= K)
            cross = min(tau + max(level - demand, 0.0) / mu, stop)
            length = cross - tau
            stock = x - demand + q * orders
            area += stock * length - 0.5 * mu * length * length
            short += _stockout_area(stock, mu, length)
            order_area += orders * length
            demand += mu * length
            tau = cross
            orders += 1
            order_times += cross
            level = a + orders * q
        length = stop - tau
        stock = x - demand + q * orders
        area += stock * length - 0.5 * mu * length * length
        short += _stockout_area(stock, mu, length)
        order_area += orders * length
        demand += mu * length
        tau = stop
        if event >= horizon:
            break
        if next_unit <= next_comp:
            demand += alpha
            next_unit = tau + _exponential(state, lam)
        else:
            demand += _jump_size(state, shape, rate)
            next_comp = tau + _exponential(state, lam_c)
        while demand >= level - _slack(level):
            orders += 1
            order_times += tau
            level = a + orders * q
    out[0] = orders
    out[1] = area
    out[2] = short
    out[3] = order_area
    out[4] = order_times
    out[5] = demand


@njit(cache=True, parallel=True)
def policy_paths(mu, alpha, lam, lam_c, shape, rate, x, a, q, horizon, seed, first, count):
    out = np.empty((count, 6))
    for k in prange(count):
        _policy_path(mu, alpha, lam, lam_c, shape, rate, x, a, q, horizon, seed, first + k, out[k])
    return out


@njit(cache=True)
def _passage(mu, alpha, lam, lam_c, shape, rate, level, seed, path_id):
    state = np.empty(1, dtype=np.uint64)
    state[0] = stream_key(seed, path_id)
    tau = 0.0
    demand = 0.0
    slack = _slack(level)
    next_unit = _first_clock(state, lam) if alpha > 0.0 else math.inf
    next_comp = _first_clock(state, lam_c)
    while True:
        event = min(next_unit, next_comp)
        if mu > 0.0 and demand + mu * (event - tau) >= level - slack:
            return min(tau + max(level - demand, 0.0) / mu, event)
        demand += mu * (event - tau)
        tau = event
        if next_unit <= next_comp:
            demand += alpha
            next_unit = tau + _exponential(state, lam)
        else:
            demand += _jump_size(state, shape, rate)
            next_comp = tau + _exponential(state, lam_c)
        if demand >= level - slack:
            return tau


@njit(cache=True, parallel=True)
def passage_times(mu, alpha, lam, lam_c, shape, rate, level, seed, first, count):
    out = np.empty(count)
    for k in prange(count):
        out[k] = _passage(mu, alpha, lam, lam_c, shape, rate, level, seed, first + k)
    return out


@njit(cache=True)
def _demand_at(mu, alpha, lam, lam_c, shape, rate, s, seed, path_id):
    state = np.empty(1, dtype=np.uint64)
    state[0] = stream_key(seed, path_id)
    demand = mu * s
    next_unit = _first_clock(state, lam) if alpha > 0.0 else math.inf
    next_comp = _first_clock(state, lam_c)
    while True:
        event = min(next_unit, next_comp)
        if event >= s:
            return demand
        if next_unit <= next_comp:
            demand += alpha
            next_unit = event + _exponential(state, lam)
        else:
            demand += _jump_size(state, shape, rate)
            next_comp = event + _exponential(state, lam_c)


@njit(cache=True, parallel=True)
def demand_values(mu, alpha, lam, lam_c, shape, rate, s, seed, first, count):
    out = np.empty(count)
    for k in prange(count):
        out[k] = _demand_at(mu, alpha, lam, lam_c, shape, rate, s, seed, first + k)
    return out


@njit(cache=True)
def path_events(alpha, lam, lam_c, shape, rate, horizon, seed, path_id):
    """Jump times, sizes and sources of one path on (0, horizon)."""
    state = np.empty(1, dtype=np.uint64)
    state[0] = stream_key(seed, path_id)
    cap = 16
    times = np.empty(cap)
    sizes = np.empty(cap)
    sources = np.empty(cap, dtype=np.int64)
    n = 0
    next_unit = _first_clock(state, lam) if alpha > 0.0 else math.inf
    next_comp = _first_clock(state, lam_c)
    while True:
        event = min(next_unit, next_comp)
        if event >= horizon:
            break
        if n == cap:
            cap *= 2
            times = np.concatenate((times, np.empty(cap - n)))
            sizes = np.concatenate((sizes, np.empty(cap - n)))
            sources = np.concatenate((sources, np.empty(cap - n, dtype=np.int64)))
        times[n] = event
        if next_unit <= next_comp:
            sizes[n] = alpha
            sources[n] = SRC_UNIT
            next_unit = event + _exponential(state, lam)
        else:
            sizes[n] = _jump_size(state, shape, rate)
            sources[n] = SRC_COMPOUND
            next_comp = event + _exponential(state, lam_c)
        n += 1
    return times[:n], sizes[:n], sources[:n]
