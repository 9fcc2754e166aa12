"""Panel-sweep kernels for the shooting solver.

The constant-coefficient panel update is exact; these kernels just iterate it
over panels and spectral parameters.  When numba is importable the kernels
are compiled (the sweep is the innermost hot loop of every eigenvalue
search); a pure-numpy fallback keeps the package functional without it.
Both implementations are exercised by tests.
"""

from __future__ import annotations

import math
import os

import numpy as np


def _phase_sweep_numpy(qmid: np.ndarray, h: float, lams: np.ndarray) -> np.ndarray:
    u = np.zeros_like(lams)
    du = np.ones_like(lams)
    count = np.zeros(lams.shape, dtype=np.int64)
    for p in range(len(qmid)):
        flip = (u < 0) | ((u == 0) & (du < 0))
        sign = np.where(flip, -1.0, 1.0)
        u = u * sign
        du = du * sign
        k2 = lams - qmid[p]
        tol = 1e-12 * (1.0 + np.abs(k2))
        trig = k2 > tol
        hyper = k2 < -tol
        u2 = np.empty_like(u)
        du2 = np.empty_like(du)
        if trig.any():
            k = np.sqrt(k2[trig])
            ut, dut = u[trig], du[trig]
            kh = k * h
            count[trig] += np.floor((np.arctan2(k * ut, dut) + kh) / math.pi
                                    ).astype(np.int64)
            c, s = np.cos(kh), np.sin(kh)
            u2[trig] = ut * c + dut * s / k
            du2[trig] = -ut * k * s + dut * c
        if hyper.any():
            kap = np.sqrt(-k2[hyper])
            arg = np.minimum(kap * h, 700.0)
            ch, sh = np.cosh(arg), np.sinh(arg)
            uh, duh = u[hyper], du[hyper]
            u2[hyper] = uh * ch + duh * sh / kap
            du2[hyper] = uh * kap * sh + duh * ch
            count[hyper] += (u2[hyper] < 0).astype(np.int64)
        lin = ~(trig | hyper)
        if lin.any():
            ul, dul, k2l = u[lin], du[lin], k2[lin]
            u2[lin] = ul * (1.0 - 0.5 * k2l * h * h) + dul * h
            du2[lin] = dul - k2l * h * (ul + 0.5 * dul * h)
            count[lin] += (u2[lin] < 0).astype(np.int64)
        u, du = u2, du2
        big = np.maximum(np.abs(u), np.abs(du))
        rescale = big > 1e100
        if rescale.any():
            u = np.where(rescale, u / big, u)
            du = np.where(rescale, du / big, du)
    flip = (u < 0) | ((u == 0) & (du < 0))
    sign = np.where(flip, -1.0, 1.0)
    return math.pi * count + np.arctan2(u * sign, du * sign)


def _sample_sweep_numpy(qmid: np.ndarray, h: float, lams: np.ndarray) -> np.ndarray:
    n = len(lams)
    out = np.zeros((n, len(qmid) + 1))
    u = np.zeros(n)
    du = np.ones(n)
    for p in range(len(qmid)):
        k2 = lams - qmid[p]
        tol = 1e-12 * (1.0 + np.abs(k2))
        trig = k2 > tol
        hyper = k2 < -tol
        u2 = np.empty_like(u)
        du2 = np.empty_like(du)
        if trig.any():
            k = np.sqrt(k2[trig])
            c, s = np.cos(k * h), np.sin(k * h)
            ut, dut = u[trig], du[trig]
            u2[trig] = ut * c + dut * s / k
            du2[trig] = -ut * k * s + dut * c
        if hyper.any():
            kap = np.sqrt(-k2[hyper])
            arg = np.minimum(kap * h, 700.0)
            ch, sh = np.cosh(arg), np.sinh(arg)
            uh, duh = u[hyper], du[hyper]
            u2[hyper] = uh * ch + duh * sh / kap
            du2[hyper] = uh * kap * sh + duh * ch
        lin = ~(trig | hyper)
        if lin.any():
            ul, dul, k2l = u[lin], du[lin], k2[lin]
            u2[lin] = ul * (1.0 - 0.5 * k2l * h * h) + dul * h
            du2[lin] = dul - k2l * h * (ul + 0.5 * dul * h)
        u, du = u2, du2
        out[:, p + 1] = u
    return out


phase_sweep = _phase_sweep_numpy
sample_sweep = _sample_sweep_numpy

if not os.environ.get("HEATLAB_NO_NUMBA"):
    try:
        from numba import njit

        @njit(cache=True)
        def _phase_sweep_jit(qmid, h, lams):  # pragma: no cover - thin kernel
            n = lams.shape[0]
            out = np.empty(n)
            for j in range(n):
                u = 0.0
                du = 1.0
                count = 0
                lam = lams[j]
                for p in range(qmid.shape[0]):
                    if u < 0.0 or (u == 0.0 and du < 0.0):
                        u = -u
                        du = -du
                    k2 = lam - qmid[p]
                    tol = 1e-12 * (1.0 + abs(k2))
                    if k2 > tol:
                        k = math.sqrt(k2)
                        kh = k * h
                        count += int((math.atan2(k * u, du) + kh) // math.pi)
                        c = math.cos(kh)
                        s = math.sin(kh)
                        u, du = u * c + du * s / k, -u * k * s + du * c
                    elif k2 < -tol:
                        kap = math.sqrt(-k2)
                        arg = kap * h
                        if arg > 700.0:
                            arg = 700.0
                        ch = math.cosh(arg)
                        sh = math.sinh(arg)
                        u, du = u * ch + du * sh / kap, u * kap * sh + du * ch
                        if u < 0.0:
                            count += 1
                    else:
                        u, du = (u * (1.0 - 0.5 * k2 * h * h) + du * h,
                                 du - k2 * h * (u + 0.5 * du * h))
                        if u < 0.0:
                            count += 1
                    big = abs(u)
                    if abs(du) > big:
                        big = abs(du)
                    if big > 1e100:
                        u /= big
                        du /= big
                if u < 0.0 or (u == 0.0 and du < 0.0):
                    u = -u
                    du = -du
                out[j] = math.pi * count + math.atan2(u, du)
            return out

        @njit(cache=True)
        def _sample_sweep_jit(qmid, h, lams):  # pragma: no cover - thin kernel
            n = lams.shape[0]
            npan = qmid.shape[0]
            out = np.zeros((n, npan + 1))
            for j in range(n):
                u = 0.0
                du = 1.0
                lam = lams[j]
                for p in range(npan):
                    k2 = lam - qmid[p]
                    tol = 1e-12 * (1.0 + abs(k2))
                    if k2 > tol:
                        k = math.sqrt(k2)
                        kh = k * h
                        c = math.cos(kh)
                        s = math.sin(kh)
                        u, du = u * c + du * s / k, -u * k * s + du * c
                    elif k2 < -tol:
                        kap = math.sqrt(-k2)
                        arg = kap * h
                        if arg > 700.0:
                            arg = 700.0
                        ch = math.cosh(arg)
                        sh = math.sinh(arg)
                        u, du = u * ch + du * sh / kap, u * kap * sh + du * ch
                    else:
                        u, du = (u * (1.0 - 0.5 * k2 * h * h) + du * h,
                                 du - k2 * h * (u + 0.5 * du * h))
                    out[j, p + 1] = u
            return out

        def phase_sweep(qmid, h, lams):
            return _phase_sweep_jit(np.ascontiguousarray(qmid), float(h),
                                    np.ascontiguousarray(lams, dtype=float))

        def sample_sweep(qmid, h, lams):
            return _sample_sweep_jit(np.ascontiguousarray(qmid), float(h),
                                     np.ascontiguousarray(lams, dtype=float))
    except ImportError:
        pass
