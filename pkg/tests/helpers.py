"""Small utilities shared by the test modules."""

import numpy as np

from implicit_kit.exprlang import BinOp, Call, Neg, Num, Pow, Var


def affine_substitute(node, T, c, n_src):
    """Tree for ``F(c + T t)``: source variable ``i`` becomes ``c[i] + sum_j T[i, j] t_j``.

    The new variables ``t_1..t_k`` are x-variables, ``k = T.shape[1]``.
    """
    if isinstance(node, Var):
        i = node.index - 1 if node.kind == "x" else n_src + node.index - 1
        acc = Num(float(abs(c[i])))
        if c[i] < 0:
            acc = Neg(acc)
        for j in range(T.shape[1]):
            term = BinOp("*", Num(float(abs(T[i, j]))), Var("x", j + 1))
            acc = BinOp("+" if T[i, j] >= 0 else "-", acc, term)
        return acc
    if isinstance(node, Num):
        return node
    if isinstance(node, Neg):
        return Neg(affine_substitute(node.operand, T, c, n_src))
    if isinstance(node, BinOp):
        return BinOp(node.op, affine_substitute(node.left, T, c, n_src),
                     affine_substitute(node.right, T, c, n_src))
    if isinstance(node, Pow):
        return Pow(affine_substitute(node.base, T, c, n_src), node.exponent)
    return Call(node.func, affine_substitute(node.arg, T, c, n_src))


def central_jacobian(func, x, step=1e-6):
    """Central differences, one column per coordinate of ``x``."""
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(x.size):
        h = step * max(1.0, abs(x[k]))
        up, down = x.copy(), x.copy()
        up[k] += h
        down[k] -= h
        cols.append((np.atleast_1d(func(up)) - np.atleast_1d(func(down))) / (2 * h))
    return np.column_stack(cols)


def rel_close(A, B, rtol):
    """Entrywise ``|A - B| <= rtol * max(1, |B|)``."""
    A, B = np.asarray(A, dtype=float), np.asarray(B, dtype=float)
    return bool(np.all(np.abs(A - B) <= rtol * np.maximum(1.0, np.abs(B))))
