"""Extended affine Weyl group S(n) x Z^n acting on tuples of curve points.

An element is a pair (perm, trans). perm is stored in one-line notation
(perm[i - 1] is the image of i) and the product is

    (s, v)(s', v') = (s s', s'^{-1}(v) + v'),    s(v)_k = v_{s^{-1}(k)}.

Elements act on the left of parameter tuples: the translation part is
applied first (p_k -> tau^{3 v_k} p_k), then the permutation moves the entry
in slot i to slot perm(i).
"""

import re
from dataclasses import dataclass

from .elliptic import tau_pow


class WeylError(ValueError):
    """Invalid generator token or group operation."""


class NotInW0(WeylError):
    """The element changes the level (nonzero sum of translations)."""


@dataclass(frozen=True)
class WeylElement:
    """Element of S(n) x Z^n.

    Args:
        n: rank.
        perm: one-line notation, a permutation of 1..n.
        trans: integer translation vector of length n.
    """

    n: int
    perm: tuple
    trans: tuple

    def __post_init__(self):
        object.__setattr__(self, "perm", tuple(int(x) for x in self.perm))
        object.__setattr__(self, "trans", tuple(int(x) for x in self.trans))
        if sorted(self.perm) != list(range(1, self.n + 1)) or len(self.trans) != self.n:
            raise WeylError("perm must be a permutation of 1..n and trans of length n")

    def __mul__(self, other):
        return multiply(self, other)

    def __pow__(self, k):
        out = identity(self.n)
        base = self if k >= 0 else inverse(self)
        for _ in range(abs(k)):
            out = multiply(out, base)
        return out

    def to_json(self):
        return {"n": self.n, "perm": list(self.perm), "trans": list(self.trans)}


def identity(n):
    return WeylElement(n, tuple(range(1, n + 1)), (0,) * n)


def _perm_inverse(perm):
    inv = [0] * len(perm)
    for i, p in enumerate(perm, start=1):
        inv[p - 1] = i
    return tuple(inv)


def _permute_vector(perm, v):
    # s(v)_k = v_{s^{-1}(k)}
    out = [0] * len(v)
    for i, p in enumerate(perm, start=1):
        out[p - 1] = v[i - 1]
    return out


def multiply(w1, w2):
    """Group product w1 w2."""
    if w1.n != w2.n:
        raise WeylError("size mismatch")
    perm = tuple(w1.perm[w2.perm[i] - 1] for i in range(w1.n))
    moved = _permute_vector(_perm_inverse(w2.perm), w1.trans)
    return WeylElement(w1.n, perm, tuple(a + b for a, b in zip(moved, w2.trans)))


def inverse(w):
    return WeylElement(w.n, _perm_inverse(w.perm), tuple(-x for x in _permute_vector(w.perm, w.trans)))


def product(elements, n):
    out = identity(n)
    for w in elements:
        out = multiply(out, w)
    return out


def chi(w):
    """Sum of the translation entries; a homomorphism to Z."""
    return sum(w.trans)


def delta(n, i):
    v = [0] * n
    v[i - 1] = 1
    return v


def transposition(n, i, j):
    perm = list(range(1, n + 1))
    perm[i - 1], perm[j - 1] = j, i
    return WeylElement(n, perm, (0,) * n)


def rotation(n):
    """The element g: cyclic shift k -> k - 1 with translation -delta_1.

    It sends (p_1, ..., p_n) to (p_2, ..., p_n, tau^{-3} p_1).
    """
    perm = [n] + list(range(1, n))
    return WeylElement(n, perm, [-1] + [0] * (n - 1))


def alpha(n, i, j):
    """Pure translation delta_i - delta_j."""
    if i == j:
        raise WeylError("alpha needs distinct indices")
    v = [0] * n
    v[i - 1] += 1
    v[j - 1] -= 1
    return WeylElement(n, tuple(range(1, n + 1)), v)


_TOKEN = re.compile(r"^(?:s_?(\d+)|g(-?)|a\((\d+),(\d+)\))$")


def from_generator(token, n):
    """Element for one token: s<k>, g, g- (inverse of g) or a(i,j).

    Raises:
        WeylError: malformed token or index out of range.
    """
    m = _TOKEN.match(token.strip().replace(" ", ""))
    if not m:
        raise WeylError("bad token %r" % token)
    if m.group(1) is not None:
        k = int(m.group(1))
        if not 0 <= k <= n - 1:
            raise WeylError("reflection index %d out of range" % k)
        if k == 0:
            g = rotation(n)
            return multiply(multiply(g, transposition(n, 1, 2)), inverse(g))
        return transposition(n, k, k + 1)
    if m.group(3) is not None:
        i, j = int(m.group(3)), int(m.group(4))
        if not (1 <= i <= n and 1 <= j <= n):
            raise WeylError("alpha index out of range")
        return alpha(n, i, j)
    g = rotation(n)
    return inverse(g) if m.group(2) == "-" else g


def parse_word(text):
    """Split a whitespace-separated word into tokens."""
    return text.split() if isinstance(text, str) else list(text)


def word_element(word, n):
    """Product of the tokens of a word, left to right."""
    return product([from_generator(t, n) for t in parse_word(word)], n)


def act_on_params(w, P, E):
    """Left action on a tuple of curve points."""
    if len(P) != w.n:
        raise WeylError("parameter tuple has the wrong length")
    shifted = [tau_pow(E, p, 3 * v) if v else p for p, v in zip(P, w.trans)]
    out = [None] * w.n
    for i, p in enumerate(w.perm):
        out[p - 1] = shifted[i]
    return tuple(out)


def _permutation_word(perm):
    # adjacent transpositions whose product, left to right, is perm
    line = list(perm)
    used = []
    changed = True
    while changed:
        changed = False
        for i in range(len(line) - 1):
            if line[i] > line[i + 1]:
                # right multiplication by s_{i+1} swaps positions i, i+1
                line[i], line[i + 1] = line[i + 1], line[i]
                used.append(i + 1)
                changed = True
    return ["s%d" % k for k in reversed(used)]


def _root_word(i, j, m):
    # word for alpha(i, j)^m using adjacent roots
    if i < j:
        lo, hi, up = i, j, True
    else:
        lo, hi, up = j, i, False
    direct = hi - lo
    if direct * m <= 2 * (hi - lo - 1) + m:
        # telescoping sum of adjacent roots
        toks = []
        for k in range(lo, hi):
            toks += ["a(%d,%d)" % ((k, k + 1) if up else (k + 1, k))] * m
        return toks
    # conjugate a root at (lo, lo+1) by moving slot lo+1 to hi
    conj = ["s%d" % k for k in range(hi - 1, lo, -1)]
    core = ["a(%d,%d)" % ((lo, lo + 1) if up else (lo + 1, lo))] * m
    return conj + core + conj[::-1]


def decompose_w0(w):
    """Word over s_1..s_{n-1} and adjacent a(i,i+1) whose product is w.

    The translation part is split greedily into roots delta_i - delta_j; each
    root power is written either as a telescoping sum of adjacent roots or as
    a conjugate of an adjacent root, whichever is shorter.

    Raises:
        NotInW0: chi(w) is not zero.
    """
    if chi(w) != 0:
        raise NotInW0("chi(w) = %d" % chi(w))
    n = w.n
    word = _permutation_word(w.perm)
    for i, j, m in root_pairs(w.trans):
        word += _root_word(i, j, m)
    return word


def root_pairs(trans):
    """Greedy split of a zero-sum vector into (i, j, m) with sum m (delta_i - delta_j)."""
    v = list(trans)
    pairs = []
    while any(v):
        i = max(range(len(v)), key=lambda k: v[k])
        j = min(range(len(v)), key=lambda k: v[k])
        m = min(v[i], -v[j])
        pairs.append((i + 1, j + 1, m))
        v[i] -= m
        v[j] += m
    return pairs


def verify_relations(n, trials=50, seed=0):
    """Check the defining relations and random associativity.

    Returns:
        list of failure descriptions (empty when everything holds).
    """
    import random

    fails = []
    e = identity(n)
    s = [from_generator("s%d" % k, n) for k in range(n)]
    g = rotation(n)
    for k in range(n):
        if s[k] * s[k] != e:
            fails.append("s%d^2" % k)
        if (s[k] * s[(k + 1) % n]) ** 3 != e:
            fails.append("(s%d s%d)^3" % (k, (k + 1) % n))
        if g * s[k] * inverse(g) != s[(k - 1) % n]:
            fails.append("g s%d g^-1" % k)
        for j in range(n):
            if min((k - j) % n, (j - k) % n) > 1 and (s[k] * s[j]) ** 2 != e:
                fails.append("(s%d s%d)^2" % (k, j))
    if g ** n != WeylElement(n, tuple(range(1, n + 1)), (-1,) * n):
        fails.append("g^n")
    rng = random.Random(seed)
    gens = s + [g, inverse(g)] + [alpha(n, 1, 2)]
    for _ in range(trials):
        a, b, c = [product(rng.choices(gens, k=5), n) for _ in range(3)]
        if (a * b) * c != a * (b * c):
            fails.append("associativity")
        if inverse(a) * a != e:
            fails.append("inverse")
        if chi(a * b) != chi(a) + chi(b):
            fails.append("chi homomorphism")
    return fails
