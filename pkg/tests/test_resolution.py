import random

from hypothesis import given, settings

from gen import disagreement, fact_space, random_db, random_denial, seeds
from icsimp.kernel import Denial, canonicalize, size
from icsimp.resolution import DerivationBudget, DerivationStats, binary_resolvent, derive_fbr, resolvents
from icsimp.rewrite import strictly_subsumes
from icsimp.syntax import format_denial, parse_denial

P = parse_denial


def same(d1, d2):
    return canonicalize(d1) == canonicalize(d2)


def dbs_for(seed, n=10):
    rng = random.Random(seed)
    return [set(), set(fact_space())] + [random_db(rng) for _ in range(n)]


class TestResolvents:
    def test_simple(self):
        (r,) = resolvents(P("<- p(X), q(X)"), P("<- r(Y), not q(Y)"))
        assert same(r, P("<- p(Y), r(Y)"))

    def test_binary(self):
        r = binary_resolvent(P("<- p(X,b), not q(c,X)"), P("<- p(a,Y), q(U,a)"), 1, 1)
        assert same(r, P("<- p(a,b), p(a,Y)"))

    def test_not_complementary(self):
        assert binary_resolvent(P("<- p(X)"), P("<- p(a)"), 0, 0) is None

    def test_clash(self):
        assert binary_resolvent(P("<- p(a)"), P("<- not p(b), q(c)"), 0, 0) is None

    def test_nee_positions_declined(self):
        phi1 = P("<- p(X), not exists(Z)[q(Z,X)]")
        phi2 = P("<- s(Y), q(c,a)")
        assert binary_resolvent(phi1, phi2, 1, 1) is None

    def test_equalities_resolve(self):
        rs = list(resolvents(P("<- a(X), X = 5"), P("<- b(W), W != 5")))
        assert any(same(r, P("<- a(X), b(X)")) for r in rs)

    def test_shared_names_standardized(self):
        (r,) = resolvents(P("<- p(X), q(X)"), P("<- not q(X), r(X,Y)"))
        assert len({v for v in canonicalize(r).body[0].atom.args}) >= 1
        assert same(r, P("<- p(A), r(A,B)"))

    @settings(max_examples=200, deadline=None)
    @given(seeds)
    def test_resolvents_are_entailed(self, n):
        rng = random.Random(n)
        d1, d2 = random_denial(rng, 1), random_denial(rng, 1)
        for r in list(resolvents(d1, d2))[:4]:
            # wherever both parents hold, so does the resolvent
            assert disagreement([d1, d2], [d1, d2, r], dbs_for(n)) is None


class TestDerive:
    def test_subsumed_goal(self):
        d = derive_fbr([P("<- p(X)")], P("<- p(a), q(a)"))
        assert d and same(d.witness, P("<- p(X)"))

    def test_two_steps(self):
        d = derive_fbr([P("<- p(X), not q(X)"), P("<- q(X)")], P("<- p(a)"))
        assert d.found

    def test_underivable(self):
        d = derive_fbr([P("<- p(X)")], P("<- q(a)"))
        assert not d and not d.cap_hit

    def test_equality_discharge(self):
        # the trusted <- a(1,5) makes W != 5 redundant
        goal = P("<- a(1,W), b(W,Z), c(Z,k), W != 5")
        n = size(goal)
        d = derive_fbr(
            [P("<- a(1,5)")], goal, support=[goal],
            accept=lambda r: size(r) < n and strictly_subsumes(r, goal),
        )
        assert d and same(d.witness, P("<- a(1,W), b(W,Z), c(Z,k)"))

    def test_budget_blocks_growth(self):
        hyps = [P("<- p(X), not q(X,Y)"), P("<- q(X,Y), r(Y), s(Y)")]
        goal = P("<- p(a), r(b), s(b)")
        # the expanded resolvent p(X), r(Y), s(E), E = Y has four literals
        assert derive_fbr(hyps, goal).found
        assert derive_fbr(hyps, goal, DerivationBudget(max_literals=4)).found
        assert not derive_fbr(hyps, goal, DerivationBudget(max_literals=3)).found

    def test_cap(self):
        hyps = [P("<- e(X,Y), not e(Y,Z), f(Z)"), P("<- e(X,Y), not f(Y)"), P("<- f(X), not e(X,X)")]
        stats = DerivationStats()
        d = derive_fbr(hyps, P("<- g(a)"), DerivationBudget(max_clauses=2), stats=stats)
        assert d.cap_hit and stats.cap_hits == 1

    def test_stats_accumulate(self):
        stats = DerivationStats()
        derive_fbr([P("<- p(X)")], P("<- q(a)"), stats=stats)
        derive_fbr([P("<- p(X)")], P("<- p(a)"), stats=stats)
        assert stats.calls == 2

    def test_trace(self):
        d = derive_fbr([P("<- p(X), not q(X)"), P("<- q(X)")], P("<- p(a)"), trace=True)
        assert d.found
        assert all(isinstance(step[0], Denial) for step in d.proof)
        assert format_denial(d.witness) in d.render() or not d.proof

    @settings(max_examples=150, deadline=None)
    @given(seeds)
    def test_sound(self, n):
        rng = random.Random(n)
        hyps = [random_denial(rng, 0) for _ in range(2)]
        goal = random_denial(rng, 1)
        rs = list(resolvents(*hyps))
        if rs and rng.random() < 0.5:
            # aim at something derivable: a resolvent plus an extra literal
            goal = Denial(rng.choice(rs).body + goal.body[:1])
        if derive_fbr(hyps, goal, DerivationBudget(max_clauses=300)).found:
            # every database satisfying the hypotheses satisfies the goal
            assert disagreement(hyps, hyps + [goal], dbs_for(n)) is None
