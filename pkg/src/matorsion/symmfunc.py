"""Generalized Kronecker delta, elementary symmetric functions and Newton tensors.

Index conventions
-----------------
Indices are 1-based in the public ``gen_delta``/``contract_delta`` API, matching
the usual tensor notation, and 0-based everywhere arrays are involved.

Matrix-valued results follow ``T[..., i, j] = [T_k]^j_i``: the row is the lower
index, the column the upper one.  With this layout ``cofactor_sk(A, k)[i, j]``
is the partial derivative of ``S_k(A)`` with respect to ``A[i, j]``.

All delta arithmetic is exact (Python / numpy integers).  The matrix functions
accept stacks of matrices with shape ``(..., n, n)``.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Sequence

import numpy as np

__all__ = [
    "InvalidInput",
    "contract_delta",
    "contraction_factor",
    "contraction_table",
    "cofactor_sk",
    "delta_tensor",
    "elem_sym_eigen",
    "elem_sym_matrix",
    "gen_delta",
    "newton_tensor",
    "permutation_sign",
]

# permutation-sign evaluation is used up to this length, determinant beyond it
SIGN_LOOKUP_MAX_K = 4


class InvalidInput(ValueError):
    """Raised for malformed index tuples or matrix shapes."""


def permutation_sign(perm: Sequence[int]) -> int:
    """Sign of a permutation of ``0..len(perm)-1`` by cycle counting."""
    perm = list(perm)
    seen = [False] * len(perm)
    sign = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = perm[i]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _check_indices(upper, lower, n):
    upper = tuple(int(i) for i in upper)
    lower = tuple(int(i) for i in lower)
    if len(upper) != len(lower):
        raise InvalidInput(f"index tuples differ in length: {len(upper)} vs {len(lower)}")
    if n is not None:
        if len(upper) > n:
            raise InvalidInput(f"{len(upper)} indices exceed dimension n={n}")
        for i in upper + lower:
            if not 1 <= i <= n:
                raise InvalidInput(f"index {i} outside [1, {n}]")
    return upper, lower


def _delta_by_sign(upper, lower):
    if len(set(upper)) != len(upper) or set(upper) != set(lower):
        return 0
    position = {v: a for a, v in enumerate(lower)}
    return permutation_sign([position[v] for v in upper])


def _bareiss_det(mat):
    """Fraction-free integer determinant."""
    m = [list(row) for row in mat]
    k = len(m)
    if k == 0:
        return 1
    sign = 1
    prev = 1
    for c in range(k - 1):
        if m[c][c] == 0:
            swap = next((r for r in range(c + 1, k) if m[r][c] != 0), None)
            if swap is None:
                return 0
            m[c], m[swap] = m[swap], m[c]
            sign = -sign
        for r in range(c + 1, k):
            for s in range(c + 1, k):
                m[r][s] = (m[r][s] * m[c][c] - m[r][c] * m[c][s]) // prev
        prev = m[c][c]
    return sign * m[k - 1][k - 1]


def _delta_by_det(upper, lower):
    return _bareiss_det([[int(i == j) for j in lower] for i in upper])


def gen_delta(upper: Sequence[int], lower: Sequence[int], n: int | None = None,
              method: str = "auto") -> int:
    """Generalized Kronecker delta ``δ^{upper}_{lower}``.

    ``method`` is ``"sign"`` (permutation sign), ``"det"`` (determinant of
    single deltas) or ``"auto"``, which picks the sign for up to
    ``SIGN_LOOKUP_MAX_K`` indices.
    """
    upper, lower = _check_indices(upper, lower, n)
    if method == "auto":
        method = "sign" if len(upper) <= SIGN_LOOKUP_MAX_K else "det"
    if method == "sign":
        return _delta_by_sign(upper, lower)
    if method == "det":
        return _delta_by_det(upper, lower)
    raise InvalidInput(f"unknown method {method!r}")


def contraction_factor(n: int, k: int, p: int) -> int:
    """``p! (n-k+p)! / (n-k)!``"""
    return math.factorial(p) * math.factorial(n - k + p) // math.factorial(n - k)


def contract_delta(upper: Sequence[int], lower: Sequence[int], p: int, n: int) -> int:
    """Sum ``δ^{i_1..i_p}_{j_1..j_p} δ^{i_1..i_p upper}_{j_1..j_p lower}`` over the
    contracted indices.

    ``upper`` and ``lower`` are the ``k - p`` free indices.  Only index tuples
    where the first factor is nonzero are visited (injective ``i`` and ``j`` a
    permutation of it); every skipped term is zero.
    """
    upper, lower = _check_indices(upper, lower, n)
    k = len(upper) + p
    if not 0 < p < k:
        raise InvalidInput(f"need 0 < p < k, got p={p}, k={k}")
    if k > n:
        raise InvalidInput(f"k={k} exceeds n={n}")
    total = 0
    perms = [(s, permutation_sign(s)) for s in itertools.permutations(range(p))]
    for itup in itertools.permutations(range(1, n + 1), p):
        for s, sgn in perms:
            jtup = tuple(itup[a] for a in s)
            total += sgn * gen_delta(itup + upper, jtup + lower, n)
    return total


@lru_cache(maxsize=None)
def _delta_terms(n: int, k: int):
    """Nonzero terms of ``δ^{J}_{I}`` over ``[0, n)^k``: (I, J, sign) arrays."""
    perms = list(itertools.permutations(range(k)))
    signs = np.array([permutation_sign(s) for s in perms], dtype=np.int64)
    tuples = np.array(list(itertools.permutations(range(n), k)), dtype=np.intp).reshape(-1, k)
    perm_arr = np.array(perms, dtype=np.intp).reshape(-1, k)
    I = np.repeat(tuples, len(perms), axis=0)
    J = np.concatenate([t[perm_arr] for t in tuples]) if len(tuples) else I
    S = np.tile(signs, len(tuples))
    for arr in (I, J, S):
        arr.setflags(write=False)
    return I, J, S


@lru_cache(maxsize=None)
def _delta_terms_sorted(n: int, k: int):
    """Terms of ``_delta_terms`` with increasing lower index tuple ``I``.

    Relabelling the summation indices shows every ``I`` contributes the same
    as its sorted version, so the full sum is ``k!`` times this one.
    """
    I, J, S = _delta_terms(n, k)
    keep = np.all(np.diff(I, axis=1) > 0, axis=1) if k > 1 else np.ones(len(I), dtype=bool)
    out = tuple(np.ascontiguousarray(a[keep]) for a in (I, J, S))
    for arr in out:
        arr.setflags(write=False)
    return out


def delta_tensor(n: int, k: int, dtype=np.int32) -> np.ndarray:
    """Dense ``δ`` with shape ``(n,)*2k``; the first ``k`` axes are the upper indices."""
    I, J, S = _delta_terms(n, k)
    out = np.zeros((n,) * (2 * k), dtype=dtype)
    if k == 0:
        out[()] = 1
        return out
    out[tuple(J.T) + tuple(I.T)] = S
    return out


def contraction_table(n: int, k: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Contract ``δ_p`` against the first ``p`` index pairs of ``δ_k`` for every
    choice of free indices.

    Returns ``(lhs, rhs)`` integer tensors of shape ``(n,)*2(k-p)``; the
    contraction identity states ``lhs == rhs``.
    """
    if not 0 < p < k <= n:
        raise InvalidInput(f"need 0 < p < k <= n, got n={n}, k={k}, p={p}")
    dk = delta_tensor(n, k, dtype=np.int64)
    dp = delta_tensor(n, p, dtype=np.int64)
    axes_k = list(range(p)) + list(range(k, k + p))
    lhs = np.tensordot(dp, dk, axes=(list(range(2 * p)), axes_k))
    rhs = contraction_factor(n, k, p) * delta_tensor(n, k - p, dtype=np.int64)
    return lhs, rhs


def elem_sym_eigen(lam, k: int):
    """k-th elementary symmetric polynomial of the entries of ``lam`` (last axis)."""
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[-1]
    if not 0 <= k <= n:
        raise InvalidInput(f"k={k} outside [0, {n}]")
    e = [np.ones(lam.shape[:-1])] + [np.zeros(lam.shape[:-1]) for _ in range(k)]
    for i in range(n):
        x = lam[..., i]
        for j in range(min(i + 1, k), 0, -1):
            e[j] = e[j] + x * e[j - 1]
    return e[k]


def _as_matrices(A):
    A = np.asarray(A)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise InvalidInput(f"expected square matrices, got shape {A.shape}")
    return A


def elem_sym_matrix(A, k: int):
    """``S_k(A) = (1/k!) δ^{j_1..j_k}_{i_1..i_k} A[i_1, j_1] ... A[i_k, j_k]``.

    Evaluated by summing the nonzero delta terms, one representative per
    set of lower indices (the ``k!`` relabellings are equal).  Works on stacks
    and on object arrays (e.g. sympy entries).
    """
    A = _as_matrices(A)
    n = A.shape[-1]
    if not 0 <= k <= n:
        raise InvalidInput(f"k={k} outside [0, {n}]")
    if k == 0:
        return np.ones(A.shape[:-2]) if A.dtype != object else 1
    I, J, S = _delta_terms_sorted(n, k)
    prod = A[..., I[:, 0], J[:, 0]]
    for a in range(1, k):
        prod = prod * A[..., I[:, a], J[:, a]]
    return (prod * S).sum(axis=-1)


def newton_tensor(A_list) -> np.ndarray:
    """Newton transformation tensor ``[T_k](A_1, ..., A_k)``.

    Returns ``T`` with ``T[..., i, j] = (1/k!) δ^{j j_1..j_k}_{i i_1..i_k}
    A_1[i_1, j_1] ... A_k[i_k, j_k]``.  ``T_0`` is the identity; it has no
    matrix argument to read ``n`` from, so ``cofactor_sk(A, 1)`` covers it.
    """
    mats = [_as_matrices(A) for A in A_list]
    if not mats:
        raise InvalidInput("newton_tensor needs at least one matrix; T_0 is the identity")
    shape = mats[0].shape
    if any(M.shape[-2:] != shape[-2:] for M in mats):
        raise InvalidInput("matrices in the list have different sizes")
    n = shape[-1]
    k = len(mats)
    if k > n - 1:
        raise InvalidInput(f"k={k} must not exceed n-1={n - 1}")
    return _newton(mats, n)


def _newton(mats, n):
    k = len(mats)
    batch = np.broadcast_shapes(*(M.shape[:-2] for M in mats))
    obj = any(M.dtype == object for M in mats)
    I, J, S = _delta_terms(n, k + 1)
    prod = mats[0][..., I[:, 1], J[:, 1]]
    for a in range(1, k):
        prod = prod * mats[a][..., I[:, a + 1], J[:, a + 1]]
    prod = prod * S / math.factorial(k)
    flat = I[:, 0] * n + J[:, 0]
    if obj:
        out = np.zeros(batch + (n * n,), dtype=object)
        for t in range(len(flat)):
            out[..., flat[t]] = out[..., flat[t]] + prod[..., t]
    else:
        scatter = np.zeros((len(flat), n * n))
        scatter[np.arange(len(flat)), flat] = 1.0
        out = prod @ scatter
    return out.reshape(batch + (n, n))


def cofactor_sk(A, k: int) -> np.ndarray:
    """Cofactor matrix ``S_k^{ij}(A) = ∂S_k(A)/∂A[i, j]``.

    Computed as ``[T_{k-1}](A)``.  For ``k = n`` this is the classical
    cofactor matrix ``det(A) A^{-T}``; it satisfies ``Σ_ij S_k^{ij} A_ij = k S_k``.
    """
    A = _as_matrices(A)
    n = A.shape[-1]
    if not 1 <= k <= n:
        raise InvalidInput(f"k={k} outside [1, {n}]")
    if k == 1:
        eye = np.eye(n, dtype=object if A.dtype == object else float)
        return np.broadcast_to(eye, A.shape).copy()
    return _newton([A] * (k - 1), n)
