"""Naive reference implementations, written independently of the package code.

Slow loops on purpose: each one follows the defining formula directly.
"""
import math

import numpy as np


def bright_channel_naive(img, k):
    h, w, _ = img.shape
    r = k // 2
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            y0, y1 = max(0, y - r), min(h, y + r + 1)
            x0, x1 = max(0, x - r), min(w, x + r + 1)
            out[y, x] = img[y0:y1, x0:x1, :].max()
    return out


def _reflect_index(i, n):
    # half-sample symmetric: -1 -> 0, -2 -> 1, n -> n-1
    period = 2 * n
    i = i % period
    return i if i < n else period - 1 - i


def box_mean_naive(x, r):
    h, w = x.shape
    out = np.zeros_like(x, dtype=np.float64)
    for y in range(h):
        for c in range(w):
            acc = 0.0
            for dy in range(-r, r + 1):
                for dx in range(-r, r + 1):
                    acc += x[_reflect_index(y + dy, h), _reflect_index(c + dx, w)]
            out[y, c] = acc / (2 * r + 1) ** 2
    return out


def guided_filter_naive(I, p, r, eps):
    I = I.astype(np.float64)
    p = p.astype(np.float64)
    mI, mp = box_mean_naive(I, r), box_mean_naive(p, r)
    cov = box_mean_naive(I * p, r) - mI * mp
    var = box_mean_naive(I * I, r) - mI * mI
    a = cov / (var + eps)
    b = mp - a * mI
    q = box_mean_naive(a, r) * I + box_mean_naive(b, r)
    return np.clip(q, 0, 1)


def gaussian_1d(size, sigma):
    c = (size - 1) / 2
    g = np.array([math.exp(-((i - c) ** 2) / (2 * sigma * sigma)) for i in range(size)])
    return g / g.sum()


def mscn_naive(img, size=7, sigma=7 / 6, c=1.0):
    """Per-pixel MSCN with replicated borders, 2-D window built as an outer product."""
    g = gaussian_1d(size, sigma)
    win = np.outer(g, g)
    h, w = img.shape
    r = size // 2
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            mu = s2 = 0.0
            for dy in range(-r, r + 1):
                for dx in range(-r, r + 1):
                    v = img[min(max(y + dy, 0), h - 1), min(max(x + dx, 0), w - 1)]
                    mu += win[dy + r, dx + r] * v
                    s2 += win[dy + r, dx + r] * v * v
            sd = math.sqrt(abs(s2 - mu * mu))
            out[y, x] = (img[y, x] - mu) / (sd + c)
    return out


def ssim_naive(x, y, size=11, sigma=1.5, L=255.0):
    """Mean SSIM over every fully-contained window of two gray images."""
    g = gaussian_1d(size, sigma)
    win = np.outer(g, g)
    c1, c2 = (0.01 * L) ** 2, (0.03 * L) ** 2
    vals = []
    for i in range(x.shape[0] - size + 1):
        for j in range(x.shape[1] - size + 1):
            a = x[i:i + size, j:j + size]
            b = y[i:i + size, j:j + size]
            ma, mb = (win * a).sum(), (win * b).sum()
            va = (win * a * a).sum() - ma * ma
            vb = (win * b * b).sum() - mb * mb
            cab = (win * a * b).sum() - ma * mb
            vals.append(((2 * ma * mb + c1) * (2 * cab + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2)))
    return float(np.mean(vals))


def mse_naive(a, b):
    acc, n = 0.0, 0
    for u, v in zip(np.ravel(a), np.ravel(b)):
        acc += (float(u) - float(v)) ** 2
        n += 1
    return acc / n


def svr_naive(sv, coef, rho, gamma, x):
    total = 0.0
    for s, c in zip(sv, coef):
        d = sum((float(a) - float(b)) ** 2 for a, b in zip(s, x))
        total += c * math.exp(-gamma * d)
    return total - rho


def window_max_naive(chan, k):
    """Stride-1 same-size max pool with out-of-bounds ignored."""
    h, w = chan.shape
    r = k // 2
    out = np.empty_like(chan)
    for y in range(h):
        for x in range(w):
            out[y, x] = chan[max(0, y - r):y + r + 1, max(0, x - r):x + r + 1].max()
    return out


def generator_param_count(base=12, stages=5, enc=3, dec=2, spp=3, cin=4, cout=3):
    """Closed-form parameter count of the U-Net generator, layer by layer."""
    conv = lambda i, o, k=3: i * o * k * k + o  # noqa: E731
    w = [base * 2**s for s in range(stages)]
    n = 0
    for s in range(stages):
        i = cin if s == 0 else w[s - 1]
        n += conv(i, w[s]) + (enc - 1) * conv(w[s], w[s])
    n += conv((spp + 1) * w[-1], w[-1], 1)
    for s in range(stages - 1, 0, -1):
        n += conv(w[s], w[s - 1]) + conv(2 * w[s - 1], w[s - 1]) + (dec - 1) * conv(w[s - 1], w[s - 1])
    n += conv(w[0], cout, 1)
    return n


def critic_param_count(base=12, blocks=5, cin=3):
    n, i = 0, cin
    for b in range(blocks):
        o = base * 2**b
        n += i * o * 9 + o
        i = o
    return n + i + 1
