"""Independent reference computations for values frozen into the C++ tests.

Run: python3 tests/oracles/derive.py
"""
import itertools
import math

import numpy as np

EXAMPLE = [[1, -2, 4], [2, 3], [-3, 4]]
N_EXAMPLE = 4


def evaluate(clauses, bits):
    return all(any((lit > 0) == bits[abs(lit) - 1] for lit in c) for c in clauses)


def brute_force_first(clauses, n):
    for bits in itertools.product([False, True], repeat=n):
        if evaluate(clauses, bits):
            return bits
    return None


def w_matrix(clauses, n):
    w = np.zeros((len(clauses), n))
    for i, c in enumerate(clauses):
        for lit in c:
            w[i, abs(lit) - 1] = 1 if lit > 0 else -1
    return w


def sigmoid(z):
    return 1.0 / (1.0 + math.exp(-z))


def approx_sat(w, xhat, beta):
    t = np.tanh(xhat)
    inner = w @ t + (w * w) @ (t * t) - 0.5
    s = np.array([sigmoid(beta * v) for v in inner])
    outer = beta * (s.sum() - w.shape[0] + 0.5)
    return sigmoid(outer), outer


def approx_sat_fd_grad(w, xhat, beta, h=1e-6):
    g = np.zeros_like(xhat)
    for j in range(len(xhat)):
        e = np.zeros_like(xhat)
        e[j] = h
        g[j] = (approx_sat(w, xhat + e, beta)[0] - approx_sat(w, xhat - e, beta)[0]) / (2 * h)
    return g


def var_var_graph(clauses, n, m):
    """Nodes: +x1..+xn, -x1..-xn, output. Edge label: m clause slots + 3 kind flags."""
    def node(lit):
        return lit - 1 if lit > 0 else n + (-lit) - 1
    labels = {}
    for i, c in enumerate(clauses):
        for a, b in itertools.combinations(c, 2):
            key = tuple(sorted((node(a), node(b))))
            labels.setdefault(key, np.zeros(m + 3))
            labels[key][i] = 1.0
            labels[key][m + 0] = 1.0
    for v in range(1, n + 1):
        lab = np.zeros(m + 3)
        lab[m + 1] = 1.0
        labels[(node(v), node(-v))] = lab
    for u in range(2 * n):
        lab = np.zeros(m + 3)
        lab[m + 2] = 1.0
        labels[(u, 2 * n)] = lab
    node_labels = np.zeros((2 * n + 1, 3))
    node_labels[:n, 0] = 1
    node_labels[n:2 * n, 1] = 1
    node_labels[2 * n, 2] = 1
    return node_labels, labels


def pattern(count, a, b, c):
    return np.array([a * math.sin(b * k + c) for k in range(count)])


def nonlinear_fixed_point(node_labels, edges, s, hidden, el):
    nl = 3
    in_dim = nl + el + s + nl
    sizes = [hidden * in_dim, hidden, s * hidden, s, 2 * s, 2]
    p = pattern(sum(sizes), 0.25, 0.7, 0.3)
    parts = np.split(p, np.cumsum(sizes)[:-1])
    W1 = parts[0].reshape(hidden, in_dim)
    b1, W2, b2 = parts[1], parts[2].reshape(s, hidden), parts[3]
    R, r0 = parts[4].reshape(2, s), parts[5]
    N = node_labels.shape[0]
    nbrs = [[] for _ in range(N)]
    for (u, v), lab in edges.items():
        nbrs[u].append((v, lab))
        nbrs[v].append((u, lab))
    x = np.zeros((N, s))
    for _ in range(500):
        new = np.zeros_like(x)
        for n in range(N):
            for u, lab in nbrs[n]:
                z = np.concatenate([node_labels[n], lab, x[u], node_labels[u]])
                new[n] += W2 @ np.tanh(W1 @ z + b1) + b2
        done = np.max(np.abs(new - x)) <= 1e-14
        x = new
        if done:
            break
    return x, R, r0


def linear_fixed_point(node_labels, edges, s, el, mu=0.9):
    nl = 3
    labels = nl + el + nl
    sizes = [s * s * labels, s * s, s * nl, s, 2 * s, 2]
    p = pattern(sum(sizes), 0.5, 0.3, 1.1)
    parts = np.split(p, np.cumsum(sizes)[:-1])
    Phi = parts[0].reshape(s * s, labels)
    phi0, B, b0 = parts[1], parts[2].reshape(s, nl), parts[3]
    R, r0 = parts[4].reshape(2, s), parts[5]
    N = node_labels.shape[0]
    nbrs = [[] for _ in range(N)]
    for (u, v), lab in edges.items():
        nbrs[u].append((v, lab))
        nbrs[v].append((u, lab))
    x = np.zeros((N, s))
    for _ in range(2000):
        new = np.zeros_like(x)
        for n in range(N):
            deg = len(nbrs[n])
            for u, lab in nbrs[n]:
                z = np.concatenate([node_labels[n], lab, node_labels[u]])
                A = (mu / (s * deg)) * np.tanh(Phi @ z + phi0).reshape(s, s)
                new[n] += A @ x[u] + B @ node_labels[n] + b0
        done = np.max(np.abs(new - x)) <= 1e-15
        x = new
        if done:
            break
    return x, R, r0


def softmax_sat(R, r0, state):
    logits = R @ state + r0
    z = np.exp(logits - logits.max())
    return z[0] / z.sum()


def main():
    print("brute-force first model of the example:", brute_force_first(EXAMPLE, N_EXAMPLE))
    php = [[1, 2], [3, 4], [5, 6]]
    for h in (1, 2):
        for i, j in itertools.combinations(range(3), 2):
            php.append([-(2 * i + h), -(2 * j + h)])
    print("pigeonhole(3,2) clauses:", php)
    print("pigeonhole(3,2) satisfiable:", brute_force_first(php, 6) is not None)

    print("sigma(0.5) = %.17g" % sigmoid(0.5))
    w = w_matrix(EXAMPLE, N_EXAMPLE)
    xhat = np.array([0.3, -0.7, 1.2, 0.1])
    for beta in (1.0, 3.0):
        value, outer = approx_sat(w, xhat, beta)
        print("approx_sat beta=%g: value %.17g outer %.17g" % (beta, value, outer))
        print("  fd gradient", ["%.12g" % g for g in approx_sat_fd_grad(w, xhat, beta)])

    node_labels, edges = var_var_graph(EXAMPLE, N_EXAMPLE, 3)
    x, R, r0 = nonlinear_fixed_point(node_labels, edges, s=3, hidden=4, el=6)
    print("nonlinear output state", ["%.15g" % v for v in x[-1]])
    print("nonlinear p_sat %.15g" % softmax_sat(R, r0, x[-1]))
    x, R, r0 = linear_fixed_point(node_labels, edges, s=2, el=6)
    print("linear output state", ["%.15g" % v for v in x[-1]])
    print("linear p_sat %.15g" % softmax_sat(R, r0, x[-1]))


if __name__ == "__main__":
    main()


class Mt64:
    """Reference MT19937-64 (Matsumoto and Nishimura)."""

    def __init__(self, seed):
        self.mt = [0] * 312
        self.mt[0] = seed & 0xFFFFFFFFFFFFFFFF
        for i in range(1, 312):
            prev = self.mt[i - 1]
            self.mt[i] = (6364136223846793005 * (prev ^ (prev >> 62)) + i) & 0xFFFFFFFFFFFFFFFF
        self.index = 312

    def next(self):
        if self.index >= 312:
            for i in range(312):
                x = (self.mt[i] & 0xFFFFFFFF80000000) | (self.mt[(i + 1) % 312] & 0x7FFFFFFF)
                xa = x >> 1
                if x & 1:
                    xa ^= 0xB5026F5AA96619E9
                self.mt[i] = self.mt[(i + 156) % 312] ^ xa
            self.index = 0
        y = self.mt[self.index]
        self.index += 1
        y ^= (y >> 29) & 0x5555555555555555
        y ^= (y << 17) & 0x71D67FFFEDA60000
        y ^= (y << 37) & 0xFFF7EEE000000000
        y ^= y >> 43
        return y & 0xFFFFFFFFFFFFFFFF

    def index_below(self, bound):
        top = 2**64 - 1
        limit = top - (top % bound)
        r = self.next()
        while r >= limit:
            r = self.next()
        return r % bound


def random_3sat(n, m, seed):
    rng = Mt64(seed)
    out = []
    for _ in range(m):
        vars_ = []
        while len(vars_) < 3:
            v = 1 + rng.index_below(n)
            if v not in vars_:
                vars_.append(v)
        out.append([-v if rng.next() >> 63 else v for v in vars_])
    return out


if __name__ == "__main__":
    engine = Mt64(5489)
    print("mt19937_64 default seed, 10000th output:", [engine.next() for _ in range(10000)][-1])
    print("random_3sat(20, 3, 1):", random_3sat(20, 3, 1))
