"""PDDL 2.1 parser for the linear numeric fragment.

Supported requirements: :typing :fluents :negative-preconditions :equality.
Everything is lowercased (PDDL is case-insensitive) and all numeric
literals are read as exact rationals. Conditional effects, durative
actions, quantifiers, object equality and non-linear arithmetic raise
UnsupportedFeature / NonLinearExpression.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from ramp.errors import (
    NonLinearExpression,
    PddlSyntaxError,
    PddlTypeError,
    UninitializedFunction,
    UnknownObjectType,
    UnsupportedFeature,
)
from ramp.pddl.model import (
    COMPARATORS,
    ROOT_TYPE,
    ActionSchema,
    Atom,
    FunctionSchema,
    FunctionTerm,
    LiftedDomain,
    LinearExpr,
    Literal,
    NumericCondition,
    NumericEffect,
    PredicateSchema,
    Problem,
    TypedParam,
    make_condition,
    sort_values,
)

ACCEPTED_REQUIREMENTS = {":typing", ":fluents", ":negative-preconditions", ":equality"}


class SExpr:
    """Either an atom (string, with position) or a list of SExpr."""

    __slots__ = ("value", "items", "line", "col")

    def __init__(self, value=None, items=None, line=0, col=0):
        self.value = value
        self.items = items
        self.line = line
        self.col = col

    @property
    def is_atom(self) -> bool:
        return self.items is None

    def head(self) -> str:
        if self.is_atom or not self.items or not self.items[0].is_atom:
            return ""
        return self.items[0].value

    def __repr__(self):
        return self.value if self.is_atom else "(" + " ".join(map(repr, self.items)) + ")"


def tokenize(text: str):
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            i += 1
            col += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield (ch, line, col)
            i += 1
            col += 1
        else:
            start = i
            start_col = col
            while i < n and text[i] not in " \t\r\n();":
                i += 1
                col += 1
            yield (text[start:i].lower(), line, start_col)


def read_sexprs(text: str) -> list[SExpr]:
    stack: list[SExpr] = []
    top: list[SExpr] = []
    for tok, line, col in tokenize(text):
        if tok == "(":
            node = SExpr(items=[], line=line, col=col)
            (stack[-1].items if stack else top).append(node)
            stack.append(node)
        elif tok == ")":
            if not stack:
                raise PddlSyntaxError("unbalanced ')'", line, col)
            stack.pop()
        else:
            (stack[-1].items if stack else top).append(SExpr(value=tok, line=line, col=col))
    if stack:
        raise PddlSyntaxError("unbalanced '('", stack[-1].line, stack[-1].col)
    return top


def _as_number(token: str) -> Fraction | None:
    try:
        return Fraction(token)
    except ValueError:
        return None


def _parse_typed_list(items: list[SExpr], what: str) -> list[TypedParam]:
    """Parse `a b - t c d - u e` style lists; untyped names get `object`."""
    out: list[TypedParam] = []
    pending: list[str] = []
    it = iter(items)
    for node in it:
        if not node.is_atom:
            raise PddlSyntaxError(f"expected name in {what}", node.line, node.col)
        if node.value == "-":
            try:
                tnode = next(it)
            except StopIteration:
                raise PddlSyntaxError(f"dangling '-' in {what}", node.line, node.col) from None
            if not tnode.is_atom:
                raise PddlSyntaxError(f"expected type name in {what}", tnode.line, tnode.col)
            out.extend(TypedParam(n, tnode.value) for n in pending)
            pending = []
        else:
            pending.append(node.value)
    out.extend(TypedParam(n, ROOT_TYPE) for n in pending)
    return out


def validate_linear(node: SExpr, functions: Mapping[str, FunctionSchema] | None = None) -> LinearExpr:
    """Normalize an arithmetic s-expression into a canonical LinearExpr.

    Raises NonLinearExpression on products of two non-constant
    subexpressions or division by a non-constant.
    """
    if node.is_atom:
        num = _as_number(node.value)
        if num is not None:
            return LinearExpr.const(num)
        # bare zero-arity function reference
        return LinearExpr.term(FunctionTerm(node.value))
    if not node.items:
        raise PddlSyntaxError("empty expression", node.line, node.col)
    head = node.head()
    args = node.items[1:]
    if head == "+":
        acc = LinearExpr.const(0)
        for a in args:
            acc = acc + validate_linear(a, functions)
        return acc
    if head == "-":
        if len(args) == 1:
            return validate_linear(args[0], functions).scale(Fraction(-1))
        if len(args) == 2:
            return validate_linear(args[0], functions) - validate_linear(args[1], functions)
        raise PddlSyntaxError("'-' takes one or two arguments", node.line, node.col)
    if head == "*":
        if len(args) != 2:
            raise PddlSyntaxError("'*' takes two arguments", node.line, node.col)
        left = validate_linear(args[0], functions)
        right = validate_linear(args[1], functions)
        if left.is_constant():
            return right.scale(left.constant)
        if right.is_constant():
            return left.scale(right.constant)
        raise NonLinearExpression(f"product of two function terms at line {node.line}")
    if head == "/":
        if len(args) != 2:
            raise PddlSyntaxError("'/' takes two arguments", node.line, node.col)
        num = validate_linear(args[0], functions)
        den = validate_linear(args[1], functions)
        if not den.is_constant():
            raise NonLinearExpression(f"division by a function term at line {node.line}")
        if den.constant == 0:
            raise PddlSyntaxError("division by zero", node.line, node.col)
        return num.scale(Fraction(1) / den.constant)
    # function application
    for part in node.items:
        if not part.is_atom:
            raise PddlSyntaxError("malformed function term", node.line, node.col)
    term = FunctionTerm(head, tuple(p.value for p in node.items[1:]))
    return LinearExpr.term(term)


class _DomainBuilder:
    def __init__(self):
        self.name = ""
        self.requirements: list[str] = []
        self.types: dict[str, str] = {}
        self.predicates: dict[str, PredicateSchema] = {}
        self.functions: dict[str, FunctionSchema] = {}
        self.actions: list[ActionSchema] = []

    def known_type(self, t: str) -> bool:
        return t == ROOT_TYPE or t in self.types

    def check_param_types(self, params: Iterable[TypedParam], where: str):
        for p in params:
            if not self.known_type(p.type):
                raise PddlTypeError(f"unknown type {p.type!r} in {where}")


def _is_comparator(head: str) -> bool:
    return head in COMPARATORS


def _split_condition(node: SExpr, b: _DomainBuilder, params: dict[str, str], where: str):
    """Walk a goal-description tree collecting literals and numeric conditions."""
    literals: list[Literal] = []
    numerics: list[NumericCondition] = []

    def is_numeric_eq(args: list[SExpr]) -> bool:
        # `=` is numeric when either side is a number or a declared function
        for a in args:
            if a.is_atom:
                if _as_number(a.value) is not None or a.value in b.functions:
                    return True
            elif a.head() in ("+", "-", "*", "/") or a.head() in b.functions:
                return True
        return False

    def walk(n: SExpr):
        if n.is_atom:
            raise PddlSyntaxError(f"unexpected token {n.value!r} in {where}", n.line, n.col)
        head = n.head()
        if head == "and":
            for child in n.items[1:]:
                walk(child)
        elif head == "not":
            if len(n.items) != 2 or n.items[1].is_atom:
                raise PddlSyntaxError("'not' takes one atom", n.line, n.col)
            inner = n.items[1]
            if _is_comparator(inner.head()):
                raise UnsupportedFeature(f"negated numeric condition in {where}")
            literals.append(Literal(_parse_atom(inner, b, params, where), positive=False))
        elif head in ("or", "imply", "exists", "forall", "when"):
            raise UnsupportedFeature(f"{head!r} conditions are not supported ({where})")
        elif _is_comparator(head):
            args = n.items[1:]
            if len(args) != 2:
                raise PddlSyntaxError(f"comparator {head!r} takes two arguments", n.line, n.col)
            if head == "=" and not is_numeric_eq(args):
                raise UnsupportedFeature(f"object equality in {where}")
            lhs = validate_linear(args[0], b.functions)
            rhs = validate_linear(args[1], b.functions)
            _check_expr_terms(lhs, b, params, where)
            _check_expr_terms(rhs, b, params, where)
            numerics.append(make_condition(lhs, head, rhs))
        else:
            literals.append(Literal(_parse_atom(n, b, params, where), positive=True))

    if not (node.is_atom and node.value == "()"):
        walk(node)
    return literals, numerics


def _parse_atom(node: SExpr, b: _DomainBuilder, params: dict[str, str] | None, where: str) -> Atom:
    if node.is_atom or not node.items or not node.items[0].is_atom:
        raise PddlSyntaxError(f"malformed atom in {where}", node.line, node.col)
    name = node.items[0].value
    if name not in b.predicates:
        raise PddlTypeError(f"unknown predicate {name!r} in {where}")
    schema = b.predicates[name]
    args = [a.value for a in node.items[1:] if a.is_atom]
    if len(args) != len(node.items) - 1 or len(args) != len(schema.params):
        raise PddlTypeError(f"wrong arity for predicate {name!r} in {where}")
    if params is not None:
        for a in args:
            if a.startswith("?") and a not in params:
                raise PddlTypeError(f"unbound variable {a!r} in {where}")
    return Atom(name, tuple(args))


def _check_expr_terms(expr: LinearExpr, b: _DomainBuilder, params: dict[str, str] | None, where: str):
    for term, _ in expr.terms:
        if term.name not in b.functions:
            raise PddlTypeError(f"unknown function {term.name!r} in {where}")
        schema = b.functions[term.name]
        if len(term.args) != len(schema.params):
            raise PddlTypeError(f"wrong arity for function {term.name!r} in {where}")
        if params is not None:
            for a in term.args:
                if a.startswith("?") and a not in params:
                    raise PddlTypeError(f"unbound variable {a!r} in {where}")


def _parse_effects(node: SExpr, b: _DomainBuilder, params: dict[str, str], where: str):
    adds: list[Atom] = []
    dels: list[Atom] = []
    numeric: list[NumericEffect] = []

    def walk(n: SExpr):
        if n.is_atom:
            raise PddlSyntaxError(f"unexpected token {n.value!r} in {where}", n.line, n.col)
        head = n.head()
        if head == "and":
            for child in n.items[1:]:
                walk(child)
        elif head == "not":
            if len(n.items) != 2:
                raise PddlSyntaxError("'not' takes one atom", n.line, n.col)
            dels.append(_parse_atom(n.items[1], b, params, where))
        elif head in ("when", "forall"):
            raise UnsupportedFeature(f"conditional effects are not supported ({where})")
        elif head in ("assign", "increase", "decrease", "scale-up", "scale-down"):
            if len(n.items) != 3:
                raise PddlSyntaxError(f"{head!r} takes a target and an expression", n.line, n.col)
            target_expr = validate_linear(n.items[1], b.functions)
            if len(target_expr.terms) != 1 or target_expr.constant != 0 or target_expr.terms[0][1] != 1:
                raise PddlSyntaxError(f"{head!r} target must be a single function term", n.line, n.col)
            target = target_expr.terms[0][0]
            expr = validate_linear(n.items[2], b.functions)
            _check_expr_terms(LinearExpr.term(target), b, params, where)
            _check_expr_terms(expr, b, params, where)
            if head in ("scale-up", "scale-down") and not expr.is_constant():
                raise NonLinearExpression(f"{head} by a non-constant in {where}")
            numeric.append(NumericEffect(target, head, expr))
        else:
            adds.append(_parse_atom(n, b, params, where))

    walk(node)
    return adds, dels, numeric


def _parse_action(node: SExpr, b: _DomainBuilder) -> ActionSchema:
    items = node.items
    if len(items) < 2 or not items[1].is_atom:
        raise PddlSyntaxError("action needs a name", node.line, node.col)
    name = items[1].value
    sections: dict[str, SExpr] = {}
    i = 2
    while i < len(items):
        key = items[i]
        if not key.is_atom or not key.value.startswith(":"):
            raise PddlSyntaxError(f"expected keyword in action {name!r}", key.line, key.col)
        if key.value in (":durative-action", ":duration"):
            raise UnsupportedFeature("durative actions")
        if i + 1 >= len(items):
            raise PddlSyntaxError(f"missing value for {key.value} in action {name!r}", key.line, key.col)
        sections[key.value] = items[i + 1]
        i += 2
    if ":parameters" not in sections:
        raise PddlSyntaxError(f"action {name!r} has no :parameters", node.line, node.col)
    params = _parse_typed_list(sections[":parameters"].items or [], f"action {name!r}")
    b.check_param_types(params, f"action {name!r}")
    if len({p.name for p in params}) != len(params):
        raise PddlSyntaxError(f"duplicate parameter in action {name!r}", node.line, node.col)
    scope = {p.name: p.type for p in params}

    bool_pre: list[Literal] = []
    num_pre: list[NumericCondition] = []
    if ":precondition" in sections:
        bool_pre, num_pre = _split_condition(sections[":precondition"], b, scope, f"action {name!r} precondition")
    adds: list[Atom] = []
    dels: list[Atom] = []
    num_eff: list[NumericEffect] = []
    if ":effect" in sections:
        adds, dels, num_eff = _parse_effects(sections[":effect"], b, scope, f"action {name!r} effect")

    both = set(adds) & set(dels)
    if both:
        raise PddlTypeError(f"atom {sorted(both)[0]} both added and deleted in action {name!r}")
    targets = [e.target for e in num_eff]
    if len(set(targets)) != len(targets):
        raise PddlTypeError(f"conflicting numeric effects on one function in action {name!r}")
    return ActionSchema(
        name=name,
        params=tuple(params),
        bool_pre=frozenset(bool_pre),
        num_pre=frozenset(num_pre),
        add_effects=frozenset(adds),
        del_effects=frozenset(dels),
        num_effects=tuple(sorted(num_eff, key=NumericEffect.sort_key)),
    )


def parse_domain(text: str) -> LiftedDomain:
    top = read_sexprs(text)
    if len(top) != 1 or top[0].head() != "define":
        raise PddlSyntaxError("expected a single (define (domain ...)) form")
    items = top[0].items[1:]
    if not items or items[0].head() != "domain" or len(items[0].items) != 2:
        raise PddlSyntaxError("missing (domain <name>)")
    b = _DomainBuilder()
    b.name = items[0].items[1].value

    for section in items[1:]:
        head = section.head()
        if head == ":requirements":
            for req in section.items[1:]:
                if req.value not in ACCEPTED_REQUIREMENTS:
                    raise UnsupportedFeature(f"requirement {req.value!r}")
                b.requirements.append(req.value)
        elif head == ":types":
            for tp in _parse_typed_list(section.items[1:], ":types"):
                b.types[tp.name] = tp.type
            for t, parent in b.types.items():
                if parent != ROOT_TYPE and parent not in b.types:
                    raise PddlTypeError(f"unknown parent type {parent!r} for {t!r}")
        elif head == ":predicates":
            for p in section.items[1:]:
                if p.is_atom or not p.items:
                    raise PddlSyntaxError("malformed predicate declaration", p.line, p.col)
                pname = p.items[0].value
                if pname in b.predicates:
                    raise PddlTypeError(f"duplicate predicate {pname!r}")
                params = _parse_typed_list(p.items[1:], f"predicate {pname!r}")
                b.check_param_types(params, f"predicate {pname!r}")
                b.predicates[pname] = PredicateSchema(pname, tuple(params))
        elif head == ":functions":
            for f in section.items[1:]:
                if f.is_atom:
                    if f.value == "-":
                        raise UnsupportedFeature("typed (non-numeric) function declarations")
                    raise PddlSyntaxError("malformed function declaration", f.line, f.col)
                fname = f.items[0].value
                if fname in b.functions:
                    raise PddlTypeError(f"duplicate function {fname!r}")
                params = _parse_typed_list(f.items[1:], f"function {fname!r}")
                b.check_param_types(params, f"function {fname!r}")
                b.functions[fname] = FunctionSchema(fname, tuple(params))
        elif head == ":action":
            b.actions.append(_parse_action(section, b))
        elif head in (":constants",):
            raise UnsupportedFeature("domain constants")
        elif head in (":durative-action", ":derived", ":axioms"):
            raise UnsupportedFeature(head)
        else:
            raise PddlSyntaxError(f"unknown domain section {head!r}", section.line, section.col)

    names = [a.name for a in b.actions]
    if len(set(names)) != len(names):
        raise PddlTypeError("duplicate action name")
    return LiftedDomain(
        name=b.name,
        types=tuple(sorted(b.types.items())),
        predicates=tuple(b.predicates.values()),
        functions=tuple(b.functions.values()),
        actions=tuple(b.actions),
        requirements=tuple(sorted(set(b.requirements))),
    )


def _ground_binding_ok(domain: LiftedDomain, schema_params, args, objects: dict[str, str]) -> bool:
    if len(schema_params) != len(args):
        return False
    for p, a in zip(schema_params, args):
        if a not in objects or not domain.is_subtype(objects[a], p.type):
            return False
    return True


def parse_problem(text: str, domain: LiftedDomain) -> Problem:
    top = read_sexprs(text)
    if len(top) != 1 or top[0].head() != "define":
        raise PddlSyntaxError("expected a single (define (problem ...)) form")
    items = top[0].items[1:]
    if not items or items[0].head() != "problem" or len(items[0].items) != 2:
        raise PddlSyntaxError("missing (problem <name>)")
    name = items[0].items[1].value

    b = _DomainBuilder()
    b.name = domain.name
    b.types = dict(domain.types)
    b.predicates = {p.name: p for p in domain.predicates}
    b.functions = {f.name: f for f in domain.functions}

    domain_name = ""
    objects: dict[str, str] = {}
    init_atoms: set[Atom] = set()
    init_values: dict[FunctionTerm, Fraction] = {}
    goal_literals: list[Literal] = []
    goal_conditions: list[NumericCondition] = []

    for section in items[1:]:
        head = section.head()
        if head == ":domain":
            domain_name = section.items[1].value
            if domain_name != domain.name:
                raise PddlTypeError(f"problem is for domain {domain_name!r}, not {domain.name!r}")
        elif head == ":objects":
            for obj in _parse_typed_list(section.items[1:], ":objects"):
                if not b.known_type(obj.type):
                    raise UnknownObjectType(f"object {obj.name!r} has unknown type {obj.type!r}")
                if obj.name in objects:
                    raise PddlTypeError(f"duplicate object {obj.name!r}")
                objects[obj.name] = obj.type
        elif head == ":init":
            for entry in section.items[1:]:
                if entry.is_atom:
                    raise PddlSyntaxError("malformed init entry", entry.line, entry.col)
                if entry.head() == "=":
                    if len(entry.items) != 3 or entry.items[1].is_atom:
                        raise PddlSyntaxError("init '=' needs (= (f args) number)", entry.line, entry.col)
                    fnode = entry.items[1]
                    fname = fnode.items[0].value
                    if fname not in b.functions:
                        raise PddlTypeError(f"unknown function {fname!r} in init")
                    term = FunctionTerm(fname, tuple(a.value for a in fnode.items[1:]))
                    vnode = entry.items[2]
                    if not vnode.is_atom or _as_number(vnode.value) is None:
                        raise PddlSyntaxError("init value must be a number", vnode.line, vnode.col)
                    if term in init_values:
                        raise PddlTypeError(f"duplicate init value for {term}")
                    init_values[term] = _as_number(vnode.value)
                elif entry.head() == "not":
                    raise UnsupportedFeature("negative init literals")
                else:
                    init_atoms.add(_parse_atom(entry, b, None, ":init"))
        elif head == ":goal":
            if len(section.items) != 2:
                raise PddlSyntaxError("goal takes a single condition", section.line, section.col)
            goal_literals, goal_conditions = _split_condition(section.items[1], b, None, ":goal")
        elif head == ":metric":
            continue  # plan metrics are ignored; the planner is satisficing
        else:
            raise PddlSyntaxError(f"unknown problem section {head!r}", section.line, section.col)

    # type-check all ground atoms / terms against the object list
    for atom in init_atoms:
        schema = b.predicates[atom.pred]
        if not _ground_binding_ok(domain, schema.params, atom.args, objects):
            raise PddlTypeError(f"ill-typed init atom {atom}")
    for term in init_values:
        schema = b.functions[term.name]
        if not _ground_binding_ok(domain, schema.params, term.args, objects):
            raise PddlTypeError(f"ill-typed init value for {term}")
    for lit in goal_literals:
        schema = b.predicates[lit.atom.pred]
        if not _ground_binding_ok(domain, schema.params, lit.atom.args, objects):
            raise PddlTypeError(f"ill-typed goal literal {lit}")
    for cond in goal_conditions:
        for term, _ in cond.lhs.terms:
            schema = b.functions[term.name]
            if not _ground_binding_ok(domain, schema.params, term.args, objects):
                raise PddlTypeError(f"ill-typed goal term {term}")

    # every type-consistent ground function instance must have an init value
    from itertools import product

    for fname, fschema in b.functions.items():
        pools = []
        for p in fschema.params:
            pool = [o for o, t in objects.items() if domain.is_subtype(t, p.type)]
            pools.append(pool)
        for combo in product(*pools):
            term = FunctionTerm(fname, combo)
            if term not in init_values:
                raise UninitializedFunction(f"{term} has no value in :init")

    return Problem(
        name=name,
        domain_name=domain_name or domain.name,
        objects=tuple(sorted(TypedParam(o, t) for o, t in objects.items())),
        init_atoms=frozenset(init_atoms),
        init_values=sort_values(init_values),
        goal_literals=frozenset(goal_literals),
        goal_conditions=frozenset(goal_conditions),
    )
