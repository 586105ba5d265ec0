"""The R-graph semigroup: normal forms, word reduction and multiplication.

Every nonzero element has a unique normal form (plus path) 1_base (minus path):
a composable path of plus edges ending at `base`, followed by a composable path
of minus edges starting at `base`. A minus edge followed by a plus edge of the
same block cancels to an idempotent if the pair is related, and gives zero
otherwise; so does any other minus-then-plus meeting.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class NormalForm:
    plus: tuple
    base: str
    minus: tuple

    def is_idempotent(self):
        return not self.plus and not self.minus

    def is_pure(self):
        return not self.plus or not self.minus

    def tokens(self):
        return list(self.plus) + [self.base] + list(self.minus)

    def __str__(self):
        return "plus:[{}] base:{} minus:[{}]".format(",".join(self.plus), self.base, ",".join(self.minus))


class _Zero:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ZERO"

    def __str__(self):
        return "0"

    def __reduce__(self):
        return (_Zero, ())


ZERO = _Zero()


def idempotent(vertex):
    return NormalForm((), vertex, ())


def token_kind(g, token):
    if token in g.minus_by_id:
        return "minus"
    if token in g.plus_by_id:
        return "plus"
    if token in g.vertices:
        return "vertex"
    raise ValueError(f"unknown token {token!r}")


class Reducer:
    """Left-to-right stack reduction of a generator word, with undo.

    `push` multiplies the current product on the right by one generator and
    returns False once the product is zero. `pop` undoes the last push.
    """

    def __init__(self, g):
        self.g = g
        self.plus = []
        self.minus = []
        self.base = None
        self.zero_depth = 0
        self._undo = []

    def end_vertex(self):
        if self.minus:
            return self.g.minus_by_id[self.minus[-1]].target
        return self.base

    def is_zero(self):
        return self.zero_depth > 0

    def push(self, token):
        if self.zero_depth:
            self.zero_depth += 1
            self._undo.append(("zero",))
            return False
        g = self.g
        end = self.end_vertex()
        if token in g.minus_by_id:
            e = g.minus_by_id[token]
            if end is not None and e.source != end:
                return self._kill()
            self._undo.append(("minus", self.base))
            if self.base is None:
                self.base = e.source
            self.minus.append(token)
            return True
        if token in g.plus_by_id:
            e = g.plus_by_id[token]
            if end is not None and e.source != end:
                return self._kill()
            if self.minus:
                last = self.minus[-1]
                if g.block_of(last) == g.block_of(token) and (last, token) in g.relation:
                    self.minus.pop()
                    self._undo.append(("cancel", last))
                    return True
                return self._kill()
            self._undo.append(("plus", self.base))
            self.plus.append(token)
            self.base = e.target
            return True
        if token in g.vertices:
            if end is not None and token != end:
                return self._kill()
            self._undo.append(("vertex", self.base))
            if self.base is None:
                self.base = token
            return True
        raise ValueError(f"unknown token {token!r}")

    def _kill(self):
        self.zero_depth = 1
        self._undo.append(("zero",))
        return False

    def pop(self):
        record = self._undo.pop()
        kind = record[0]
        if kind == "zero":
            self.zero_depth -= 1
        elif kind == "minus":
            self.minus.pop()
            self.base = record[1]
        elif kind == "cancel":
            self.minus.append(record[1])
        elif kind == "plus":
            self.plus.pop()
            self.base = record[1]
        else:
            self.base = record[1]

    def push_all(self, tokens):
        count = 0
        ok = True
        for t in tokens:
            count += 1
            if not self.push(t):
                ok = False
                break
        return ok, count

    def pop_n(self, n):
        for _ in range(n):
            self.pop()

    def value(self):
        if self.zero_depth:
            return ZERO
        if self.base is None:
            return None
        return NormalForm(tuple(self.plus), self.base, tuple(self.minus))


def reduce_word(g, word):
    """Normal form of the product of `word` (edge ids and vertex ids)."""
    word = list(word)
    if not word:
        if g.is_one_vertex():
            return idempotent(g.vertices[0])
        raise ValueError("the empty word has no value on a graph with more than one vertex")
    reducer = Reducer(g)
    for token in word:
        token_kind(g, token)
        if not reducer.push(token):
            return ZERO
    return reducer.value()


def element_tokens(g, x):
    if x is ZERO:
        return None
    for t in x.tokens():
        token_kind(g, t)
    return x.tokens()


def multiply(g, a, b):
    if a is ZERO or b is ZERO:
        return ZERO
    return reduce_word(g, element_tokens(g, a) + element_tokens(g, b))


def is_admissible(g, word):
    return reduce_word(g, word) is not ZERO


def parse_element(text):
    """Inverse of str() on elements: "0" or "plus:[..] base:v minus:[..]"."""
    text = text.strip()
    if text == "0":
        return ZERO
    try:
        plus_part, rest = text.split(" base:", 1)
        base, minus_part = rest.split(" minus:", 1)
        plus = plus_part[len("plus:["):-1]
        minus = minus_part[1:-1]
    except ValueError as exc:
        raise ValueError(f"cannot parse element {text!r}") from exc
    return NormalForm(tuple(x for x in plus.split(",") if x), base, tuple(x for x in minus.split(",") if x))


def psi(g, quotient, x):
    """Image of x under the homomorphism onto the tilde graph's semigroup.

    Tree edges and idempotents go to the idempotent of their root; every other
    edge goes to its class edge in the tilde graph.
    """
    if x is ZERO:
        return ZERO
    if quotient.source_graph != g:
        raise ValueError("quotient data was built for a different graph")
    tokens = []
    for t in element_tokens(g, x):
        kind = token_kind(g, t)
        if kind == "vertex":
            tokens.append(quotient.root_partition[t])
            continue
        hat = quotient.class_of_minus[t] if kind == "minus" else quotient.class_of_plus[t]
        if hat in quotient.tree_minus or hat in quotient.tree_plus:
            tokens.append(quotient.root_partition[g.minus_by_id[t].source if kind == "minus" else g.plus_by_id[t].source])
        else:
            tokens.append(hat)
    return reduce_word(quotient.tilde_graph, tokens)
