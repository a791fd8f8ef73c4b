"""Gauss-Legendre 复合求积"""
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss


@lru_cache(maxsize=32)
def gl_pairs(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """[-1, 1] 上的 n 点 Gauss-Legendre 节点与权重"""
    x, w = leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite(breaks: Sequence[float], panels_per_piece: int = 4,
              n: int = 20) -> Tuple[np.ndarray, np.ndarray]:
    """在相邻断点之间等分面板，每个面板用 n 点 GL

    Args:
        breaks: 递增断点，函数在断点之间光滑
        panels_per_piece: 每段的面板数
        n: 每个面板的节点数
    """
    x, w = gl_pairs(n)
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        edges = np.linspace(a, b, panels_per_piece + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        nodes.append((mid[:, None] + half[:, None] * x[None, :]).ravel())
        weights.append((half[:, None] * w[None, :]).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def periodic_trapezoid(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """[0, 2π) 上的等距节点，周期函数的谱精度求积"""
    theta = 2 * np.pi * np.arange(n) / n
    return theta, np.full(n, 2 * np.pi / n)
