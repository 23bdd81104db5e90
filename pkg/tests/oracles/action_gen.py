"""Random well-typed action programs over small enumerations.

``make_case(rng)`` returns a dict with the program as tuples (for
:mod:`action_ref`), its source text (for the engine), the slot layout and
initial slot values.
"""

ATTRS = {
    # name: (base type, enumeration or None)
    "color": ("text", ("red", "green", "blue")),
    "level": ("integer", (0, 1, 2)),
    "size": ("integer", None),
    "tag": ("text", None),
}
ENUMS = {name: vals for name, (_, vals) in ATTRS.items() if vals is not None}
SLOT_ATTR = {"c": "color", "lv": "level", "n": "size", "t": "tag"}

PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4, "+": 5, "-": 5}
TEXT_POOL = ["red", "green", "blue", "x", "", 'q"uote', "back\\slash", ".L0", "%rax"]
BIG = 2**63 - 1


def _layout(rng):
    arity = rng.randint(1, 3)
    layout = []
    for _ in range(arity + 1):
        names = [s for s in SLOT_ATTR if rng.random() < 0.8] or ["n"]
        layout.append({s: SLOT_ATTR[s] for s in names})
    return layout


def _random_value(rng, attr):
    base, enum = ATTRS[attr]
    if enum is not None:
        return rng.choice(enum)
    if base == "integer":
        return rng.choice([rng.randint(-5, 5), rng.randint(-100, 100), BIG - rng.randint(0, 3)])
    return rng.choice(TEXT_POOL)


class _Gen:
    def __init__(self, rng, layout):
        self.rng = rng
        self.layout = layout

    def slots_of_type(self, t):
        return [(i, s) for i, slots in enumerate(self.layout)
                for s, a in slots.items() if ATTRS[a][0] == t]

    def expr(self, t, depth):
        rng = self.rng
        leaf = depth <= 0 or rng.random() < 0.3
        if t == "integer":
            choices = ["lit", "slot"] if leaf else ["lit", "slot", "bin", "bin", "call", "vals"]
            kind = rng.choice(choices)
            if kind == "slot" and self.slots_of_type("integer"):
                i, s = rng.choice(self.slots_of_type("integer"))
                return ("slot", i, s)
            if kind == "bin":
                return ("bin", rng.choice("+-"), self.expr("integer", depth - 1),
                        self.expr("integer", depth - 1))
            if kind == "call":
                return ("call", "create_label", [])
            if kind == "vals":
                return ("vals", "level", self._index(depth))
            return ("lit", rng.choice([rng.randint(-9, 9), rng.randint(-9, 9), BIG, -BIG - 1]))
        if t == "text":
            choices = ["lit", "slot"] if leaf else ["lit", "slot", "vals", "call"]
            kind = rng.choice(choices)
            if kind == "slot" and self.slots_of_type("text"):
                i, s = rng.choice(self.slots_of_type("text"))
                return ("slot", i, s)
            if kind == "vals":
                return ("vals", "color", self._index(depth))
            if kind == "call":
                fname = rng.choice(["to_str", "print_as_a_label"])
                return ("call", fname, [self.expr("integer", depth - 1)])
            return ("lit", rng.choice(TEXT_POOL))
        # boolean
        kind = rng.choice(["eq", "eq", "cmp"] if leaf else ["eq", "cmp", "and", "or", "not"])
        if kind == "eq":
            sub = rng.choice(["integer", "text"])
            return ("bin", rng.choice(["==", "!="]), self.expr(sub, depth - 1),
                    self.expr(sub, depth - 1))
        if kind == "cmp":
            return ("bin", rng.choice(["<", "<=", ">", ">="]), self.expr("integer", depth - 1),
                    self.expr("integer", depth - 1))
        if kind == "not":
            return ("not", self.expr("boolean", depth - 1))
        return ("bin", "&&" if kind == "and" else "||", self.expr("boolean", depth - 1),
                self.expr("boolean", depth - 1))

    def _index(self, depth):
        if self.rng.random() < 0.85:
            return ("lit", self.rng.randint(0, 2))
        return self.expr("integer", depth - 1)

    def block(self, depth, n):
        return [self.stmt(depth) for _ in range(n)]

    def stmt(self, depth):
        rng = self.rng
        r = rng.random()
        if r < 0.05:
            return ("revert",)
        if r < 0.10:
            return ("callstmt", "create_label", [])
        if r < 0.30 and depth > 0:
            other = self.block(depth - 1, rng.randint(0, 2)) if rng.random() < 0.6 else []
            return ("if", self.expr("boolean", 2), self.block(depth - 1, rng.randint(0, 3)), other)
        i = rng.randrange(len(self.layout))
        s = rng.choice(sorted(self.layout[i]))
        return ("assign", i, s, self.expr(ATTRS[self.layout[i][s]][0], rng.randint(0, 3)))


# -- rendering to action source ----------------------------------------------

def _str_lit(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _target(i):
    return "$$" if i == 0 else "$%d" % i


def render_expr(e, rng):
    tag = e[0]
    if tag == "lit":
        v = e[1]
        return _str_lit(v) if isinstance(v, str) else str(v)
    if tag == "slot":
        return "%s.%s" % (_target(e[1]), e[2])
    if tag == "vals":
        return "%s_values[%s]" % (e[1], render_expr(e[2], rng))
    if tag == "call":
        return "%s(%s)" % (e[1], ", ".join(render_expr(a, rng) for a in e[2]))
    if tag == "not":
        inner = render_expr(e[1], rng)
        if e[1][0] == "bin":
            inner = "(" + inner + ")"
        return "!" + inner
    _, op, a, b = e
    left, right = render_expr(a, rng), render_expr(b, rng)
    full = rng.random() < 0.3
    if a[0] == "bin" and (full or PREC[a[1]] < PREC[op]):
        left = "(" + left + ")"
    if b[0] == "bin" and (full or PREC[b[1]] <= PREC[op]):
        right = "(" + right + ")"
    return "%s %s %s" % (left, op, right)


def render_block(stmts, rng, indent=""):
    out = []
    for s in stmts:
        tag = s[0]
        if tag == "assign":
            out.append("%s%s.%s = %s;" % (indent, _target(s[1]), s[2], render_expr(s[3], rng)))
        elif tag == "revert":
            out.append(indent + "revert;")
        elif tag == "callstmt":
            out.append("%s%s(%s);" % (indent, s[1], ", ".join(render_expr(a, rng) for a in s[2])))
        else:
            _, cond, then, other = s
            out.append("%sif (%s) {" % (indent, render_expr(cond, rng)))
            out.extend(render_block(then, rng, indent + "  "))
            if other:
                out.append(indent + "} else {")
                out.extend(render_block(other, rng, indent + "  "))
            out.append(indent + "}")
    return out


def make_case(rng):
    layout = _layout(rng)
    gen = _Gen(rng, layout)
    program = gen.block(3, rng.randint(1, 6))
    envs = []
    for i, slots in enumerate(layout):
        env = {}
        for s, a in slots.items():
            # $$ starts fully populated, RHS instances only partly
            if i == 0 or rng.random() < 0.5:
                env[s] = _random_value(rng, a)
        envs.append(env)
    source = "\n".join(render_block(program, rng))
    return {"layout": layout, "program": program, "source": source, "envs": envs}


def domains_for(layout):
    return [{s: ATTRS[a] for s, a in slots.items()} for slots in layout]
