import pytest
from hypothesis import given, settings

from gen import denials
from icsimp.kernel import (
    NEE,
    Atom,
    Const,
    Denial,
    Literal,
    Param,
    Var,
    all_vars,
    canonicalize,
    eq,
    free_vars,
    is_standardized,
    mgu,
    neq,
    rename_apart,
    size,
    standardize,
    standardize_apart,
    subst,
    unify_general,
    unwrap,
    vars_of,
    wrap,
)
from icsimp.syntax import parse_denial

X, Y, Z = Var("X"), Var("Y"), Var("Z")
a, b, c = Const("a"), Const("b"), Const("c")


def A(p, *args):
    return Atom(p, tuple(args))


def L(p, *args, positive=True):
    return Literal(A(p, *args), positive)


class TestSubstitution:
    def test_atom(self):
        assert subst(A("p", X, Y), {X: b}) == A("p", b, Y)

    def test_identity(self):
        assert subst(A("p", X), {}) == A("p", X)

    def test_denial_body(self):
        d = parse_denial("<- p(X,Y), q(Y)")
        assert subst(d, {Y: b}) == parse_denial("<- p(X,b), q(b)")

    def test_bound_variables_untouched(self):
        d = Denial((L("p", X), NEE((Y,), (L("q", X, Y),))))
        out = subst(d, {X: a, Y: b})
        assert out == Denial((L("p", a), NEE((Y,), (L("q", a, Y),))))

    def test_equalities_stay_oriented(self):
        assert subst(eq(X, Y), {X: c, Y: a}) == eq(a, c)


class TestUnification:
    def test_textbook(self):
        assert mgu(A("p", X, b), A("p", a, Y)) == {X: a, Y: b}

    @pytest.mark.parametrize("l, r", [
        (A("p", a), A("p", b)),
        (A("p", X), A("q", X)),
        (A("p", X), A("p", X, Y)),
        (A("p", Param("a")), A("p", a)),
        (A("p", Param("a")), A("p", Param("b"))),
    ])
    def test_failures(self, l, r):
        assert mgu(l, r) is None

    def test_parameter_with_variable(self):
        assert mgu(A("p", X), A("p", Param("a"))) == {X: Param("a")}

    def test_parameter_with_itself(self):
        assert mgu(A("p", Param("a")), A("p", Param("a"))) == {}

    def test_occurs_free_chain(self):
        s = mgu(A("p", X, Y), A("p", Y, a))
        assert subst(A("p", X, Y), s) == subst(A("p", Y, a), s) == A("p", a, a)

    def test_general_literals(self):
        # p(X,b) & not exists Z[q(Z,X)]  vs  p(a,Y) & not q(c,a)
        s = mgu(A("p", X, b), A("p", a, Y))
        s = unify_general(NEE((Z,), (L("q", Z, X),)), L("q", c, a, positive=False), s)
        assert s == {X: a, Y: b, Z: c}


class TestRenaming:
    def test_forced(self):
        out = standardize_apart(parse_denial("<- p(X)"), parse_denial("<- q(X)"))
        assert X not in vars_of(out)
        assert canonicalize(out) == canonicalize(parse_denial("<- q(X)"))

    def test_already_disjoint(self):
        d = parse_denial("<- q(Y)")
        assert standardize_apart(parse_denial("<- p(X)"), d) == d

    def test_nested_shadowing_made_distinct(self):
        inner = NEE((Y,), (L("r", X, Y),))
        d = Denial((L("p", X), NEE((Y,), (L("q", X, Y), inner)), NEE((Y,), (L("s", Y),))))
        out = standardize(d)
        assert is_standardized(out)
        names = all_vars(out)
        bound = [v for v in names if v not in free_vars(out)]
        assert len(bound) == len(set(bound))

    @settings(max_examples=200, deadline=None)
    @given(denials)
    def test_rename_apart_is_variant(self, d):
        r = rename_apart(d)
        assert not (vars_of(r) & vars_of(d))
        assert canonicalize(r) == canonicalize(d)


class TestCanonical:
    def test_variable_names_irrelevant(self):
        d1 = parse_denial("<- b(X,Y), b(X,Z), Y != Z")
        d2 = parse_denial("<- b(A,B), b(A,C), B != C")
        assert canonicalize(d1) == canonicalize(d2)

    def test_literal_order_irrelevant(self):
        d1 = parse_denial("<- p(X), q(X), not r(X)")
        d2 = parse_denial("<- not r(X), q(X), p(X)")
        assert canonicalize(d1) == canonicalize(d2)

    def test_different_shapes_differ(self):
        assert canonicalize(parse_denial("<- p(X), q(X)")) != canonicalize(parse_denial("<- p(X), q(Y)"))

    @settings(max_examples=200, deadline=None)
    @given(denials)
    def test_idempotent(self, d):
        c1 = canonicalize(d)
        assert canonicalize(c1) == c1


class TestWrapAndSize:
    def test_wrap_round_trip(self):
        d = parse_denial("<- q(X,Y), not exists(Z)[r(Y,Z)]")
        w = wrap(d.body, [X])
        assert X not in vars_of(Denial(w))
        assert unwrap(w) == d.body

    def test_size_counts_nee_body(self):
        assert size(parse_denial("<- p(X), q(X)")) == 2
        assert size(parse_denial("<- p(X), not exists(Y)[q(X,Y), r(Y)]")) == 4

    def test_neq_orientation(self):
        assert neq(b, a) == neq(a, b)
