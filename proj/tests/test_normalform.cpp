#include <random>

#include "doctest.h"
#include "qc/normalform.hpp"

using namespace qc;

namespace {

GaussRational q(long long p, long long r = 1) { return GaussRational(Rational(p, r)); }
GaussRational qi(long long p, long long r = 1) { return GaussRational(0, Rational(p, r)); }

// Flat polynomial in (x0, xi0, z, zbar, x2, x3, xi2) with its own bracket, for re-expansion checks
// that do not share code with the graded jet layer.
struct Flat {
    using E = std::array<int, 7>;
    std::map<E, GaussRational> t;
    int nmax = 8, order = 2;

    static int grading(const E& e) { return 2 * e[1] + e[2] + e[3]; }
    static int base(const E& e) { return e[4] + e[5] + e[6]; }
    void add(const E& e, const GaussRational& c) {
        if (c.is_zero() || grading(e) > nmax || base(e) > order) return;
        auto& v = t[e];
        v += c;
        if (v.is_zero()) t.erase(e);
    }
    static Flat from(const JetSymbol& s) {
        Flat f;
        f.nmax = s.nmax();
        f.order = s.base_order();
        for (const auto& [m, c] : s.terms())
            for (const auto& [e, v] : c.terms()) f.add({e[0], m.a, m.b, m.c, e[1], e[2], e[3]}, v);
        return f;
    }
    Flat d(int var) const {
        Flat r = empty();
        for (const auto& [e, c] : t)
            if (e[var] > 0) {
                E x = e;
                --x[var];
                r.add(x, c * GaussRational(e[var]));
            }
        return r;
    }
    Flat empty() const {
        Flat r;
        r.nmax = nmax;
        r.order = order;
        return r;
    }
    Flat operator*(const Flat& o) const {
        Flat r = empty();
        for (const auto& [a, ca] : t)
            for (const auto& [b, cb] : o.t) {
                E e;
                for (int i = 0; i < 7; ++i) e[i] = a[i] + b[i];
                r.add(e, ca * cb);
            }
        return r;
    }
    Flat& operator+=(const Flat& o) {
        for (const auto& [e, c] : o.t) add(e, c);
        return *this;
    }
    Flat scaled(const GaussRational& s) const {
        Flat r = empty();
        for (const auto& [e, c] : t) r.add(e, c * s);
        return r;
    }
    // bracket with the grading raised by the nmax slack: products of the derivative factors
    // never exceed the final grading in the terms that survive
    friend Flat bracket(const Flat& f, const Flat& g) {
        Flat F = f, G = g;
        F.nmax = G.nmax = 4 * f.nmax;
        Flat r = F.d(0) * G.d(1);
        r += (F.d(1) * G.d(0)).scaled(q(-1));
        Flat zz = F.d(2) * G.d(3);
        zz += (F.d(3) * G.d(2)).scaled(q(-1));
        r += zz.scaled(qi(-2));
        Flat out = f.empty();
        out += r;
        return out;
    }
};

Flat flat_conjugate(const Flat& G, const Flat& H) {
    Flat out = H, term = H;
    for (int k = 1; k < 64; ++k) {
        term = bracket(G, term).scaled(q(1, k));
        if (term.t.empty()) return out;
        out += term;
    }
    FAIL("flat exp-ad series did not terminate");
    return out;
}

JetSymbol base_symbol(const BaseJet& rho, int nmax = 8) { return leading_block(rho, nmax); }

BaseJet x0() { return BaseJet::monomial({1, 0, 0, 0}, q(1)); }

}  // namespace

TEST_CASE("gaussian rationals") {
    auto a = parse_gauss("3/4", "-1/2");
    CHECK(a == GaussRational(Rational(3, 4), Rational(-1, 2)));
    CHECK(parse_gauss("0.125") == q(1, 8));
    CHECK(parse_gauss("-2.5") == q(-5, 2));
    CHECK((a / a) == q(1));
    CHECK((a * a.conj()).im == 0);
    CHECK_THROWS_AS(parse_gauss("x"), ConfigError);
}

TEST_CASE("bracket conventions") {
    JetSymbol X(8), P(8);
    X.add({0, 0, 0}, x0());
    P.add({1, 0, 0}, q(1));
    // canonical pair
    auto xp = poisson_bracket(X, P);
    CHECK(xp.terms().size() == 1);
    CHECK(xp.coefficient({0, 0, 0}) == BaseJet(q(1)));
    CHECK(poisson_bracket(P, P).is_zero());
    // {z z̄, z} = 2i z
    JetSymbol Z(8);
    Z.add({0, 1, 0}, q(1));
    auto oz = poisson_bracket(omega_generator(8), Z);
    CHECK(oz.coefficient({0, 1, 0}) == BaseJet(qi(2)));
    // eigenvalue 4 i rho (b - c) with a base-dependent rho
    BaseJet rho(q(3, 2));
    rho.add({0, 1, 0, 0}, q(1, 3));
    JetSymbol H(8);
    H.add({0, 1, 1}, rho.scaled(q(2)));
    for (int b = 0; b <= 4; ++b)
        for (int c = 0; c <= 4; ++c) {
            JetSymbol m(8);
            m.add({0, b, c}, q(1));
            auto br = poisson_bracket(H, m);
            if (b == c) {
                CHECK(br.is_zero());
                continue;
            }
            CHECK(br.terms().size() == 1);
            CHECK(br.coefficient({0, b, c}) == rho.scaled(qi(4 * (b - c))));
        }
}

TEST_CASE("bracket algebra") {
    std::mt19937_64 rng(3);
    auto rnd = [&](int maxg) {
        JetSymbol s(12);
        for (int a = 0; 2 * a <= maxg; ++a)
            for (int b = 0; 2 * a + b <= maxg; ++b)
                for (int c = 0; 2 * a + b + c <= maxg; ++c) {
                    if (rng() % 3) continue;
                    BaseJet j(GaussRational(Rational(int(rng() % 7) - 3, 1 + int(rng() % 4)), Rational(int(rng() % 5) - 2, 3)));
                    j.add({1, 0, 0, 0}, q(int(rng() % 5) - 2));
                    j.add({0, 0, 1, 0}, q(1, 2));
                    s.add({a, b, c}, j);
                }
        return s;
    };
    for (int trial = 0; trial < 5; ++trial) {
        auto f = rnd(4), g = rnd(4), h = rnd(3);
        CHECK(poisson_bracket(f, f).is_zero());
        auto fg = poisson_bracket(f, g), gf = poisson_bracket(g, f);
        gf += fg;
        CHECK(gf.is_zero());
        // Jacobi
        auto j = poisson_bracket(f, poisson_bracket(g, h));
        j += poisson_bracket(g, poisson_bracket(h, f));
        j += poisson_bracket(h, poisson_bracket(f, g));
        CHECK(j.is_zero());
        // agrees with the flat bracket
        auto F = Flat::from(f), G = Flat::from(g);
        CHECK(Flat::from(fg).t == bracket(F, G).t);
        // Leibniz {f, g h} = {f,g} h + g {f,h}, checked in the flat representation
        auto H = Flat::from(h);
        auto lhs = bracket(F, G * H);
        auto rhs = bracket(F, G) * H;
        rhs += G * bracket(F, H);
        CHECK(lhs.t == rhs.t);
    }
}

TEST_CASE("bracket grading bookkeeping and overflow") {
    JetSymbol a(6), b(6);
    a.add({0, 3, 1}, q(1));   // grading 4
    b.add({1, 0, 2}, q(1));   // grading 4
    auto r = poisson_bracket(a, b);
    for (const auto& [m, c] : r.terms()) CHECK(m.grading() == 6);
    JetSymbol big(6);
    big.add({0, 4, 2}, q(1));
    JetSymbol z(6);
    z.add({0, 1, 2}, q(1));
    auto t = poisson_bracket(big, z);
    CHECK(t.truncated());
    CHECK(t.is_zero());
    CHECK_THROWS_AS(poisson_bracket(big, z, Overflow::Throw), TruncationOverflow);
    JetSymbol s(4);
    s.add({0, 5, 0}, q(1));
    CHECK(s.truncated());
    CHECK(s.is_zero());
}

TEST_CASE("step on already normal input") {
    BaseJet rho(q(1));
    auto H = base_symbol(rho);
    H.add({0, 2, 2}, q(5));
    for (int N = 3; N < 8; ++N) {
        auto st = bnf_step(H, N);
        CHECK(st.generator.is_zero());
        CHECK(st.passes == 0);
        if (N == 4) CHECK(st.remainder.coefficient({0, 2, 2}) == BaseJet(q(5)));
        else CHECK(st.remainder.is_zero());
        CHECK(st.next == H);
    }
}

TEST_CASE("single cubic perturbation") {
    BaseJet rho(q(3));
    auto H = base_symbol(rho);
    const auto eps = q(2, 7);
    H.add({0, 2, 1}, eps);
    auto st = bnf_step(H, 3);
    // generator eps / (4 i rho) z^2 z̄
    CHECK(st.generator.terms().size() == 1);
    CHECK(st.generator.coefficient({0, 2, 1}) == BaseJet(eps / (qi(4) * q(3))));
    CHECK(st.next.grading_part(3).is_zero());
    CHECK(st.remainder.is_zero());
    // lower gradings untouched
    CHECK(st.next.below(3) == H.below(3));
}

TEST_CASE("quartic invariant goes to the remainder") {
    BaseJet rho(q(1, 2));
    auto H = base_symbol(rho);
    H.add({0, 2, 2}, q(-3, 5));
    auto st = bnf_step(H, 4);
    CHECK(st.generator.is_zero());
    CHECK(st.remainder.coefficient({0, 2, 2}) == BaseJet(q(-3, 5)));
}

TEST_CASE("x0 integral branch") {
    BaseJet rho(q(1));
    auto H = base_symbol(rho);
    const auto eps = q(1, 3);
    H.add({1, 1, 1}, eps);
    auto r = birkhoff_normal_form(H, 8);
    // G = -1/2 eps x0 z z̄, and the conjugated symbol is xi0^2 + 2 z z̄ - eps^2/4 (z z̄)^2
    REQUIRE(r.steps.size() == 5);
    CHECK(r.steps[0].is_zero());
    CHECK(r.steps[1].terms().size() == 1);
    CHECK(r.steps[1].coefficient({0, 1, 1}) == BaseJet::monomial({1, 0, 0, 0}, eps * q(-1, 2)));
    CHECK(r.remainder.terms().size() == 1);
    CHECK(r.remainder.coefficient({0, 2, 2}) == BaseJet(eps * eps * q(-1, 4)));
    CHECK(verify_bnf(H, r) == "");
    // the flat re-expansion
    Flat cur = Flat::from(H);
    for (const auto& G : r.steps) cur = flat_conjugate(Flat::from(G), cur);
    auto want = Flat::from(base_symbol(rho));
    want += Flat::from(r.remainder);
    CHECK(cur.t == want.t);
}

TEST_CASE("random cubic perturbation to grading 8") {
    std::mt19937_64 rng(11);
    auto rq = [&] { return Rational(int(rng() % 9) - 4, 1 + int(rng() % 5)); };
    BaseJet rho(q(5, 4));
    rho.add({0, 1, 0, 0}, q(1, 3));   // x2
    rho.add({0, 0, 0, 2}, q(-1, 7));  // xi2^2
    auto H = base_symbol(rho);
    // real cubic perturbation in z, z̄ with x0 and base dependence: r_acb = conj(r_abc)
    for (int b = 0; b <= 3; ++b) {
        int c = 3 - b;
        if (b < c) continue;
        BaseJet j;
        j.add({0, 0, 0, 0}, GaussRational(rq(), b == c ? Rational(0) : rq()));
        j.add({1, 0, 0, 0}, GaussRational(rq(), b == c ? Rational(0) : rq()));
        j.add({0, 0, 1, 0}, GaussRational(rq(), 0));
        H.add({0, b, c}, j);
        if (b != c) H.add({0, c, b}, j.conj());
    }
    H.add({0, 2, 2}, BaseJet::monomial({1, 0, 0, 0}, q(1, 2)));
    REQUIRE(H.is_real());
    auto r = birkhoff_normal_form(H, 8);
    CHECK(verify_bnf(H, r) == "");
    CHECK(r.generator.is_real());
    CHECK(r.remainder.is_real());
    // every non-invariant monomial below grading 8 is exactly zero
    for (const auto& [m, c] : r.normal.terms()) {
        if (m.grading() >= 8) continue;
        bool leading = (m == Monomial{2, 0, 0}) || (m == Monomial{0, 1, 1});
        CHECK((m.invariant() || leading));
    }
    // the b != c branch and the x0 branch both fired
    bool bc = false, x0b = false;
    for (const auto& G : r.steps)
        for (const auto& [m, c] : G.terms()) {
            if (m.b != m.c) bc = true;
            if (m.b == m.c) x0b = true;
        }
    CHECK(bc);
    CHECK(x0b);
    // remainder commutes with the angular generator
    CHECK(poisson_bracket(omega_generator(8), r.remainder).is_zero());
    // independent re-expansion
    Flat cur = Flat::from(H);
    for (const auto& G : r.steps) cur = flat_conjugate(Flat::from(G), cur);
    for (const auto& [e, c] : cur.t) {
        if (Flat::grading(e) >= 8) continue;
        bool inv = e[1] == 0 && e[2] == e[3];
        bool leading = (e[1] == 2 && e[2] == 0 && e[3] == 0 && e[0] == 0) || (e[1] == 0 && e[2] == 1 && e[3] == 1);
        CHECK((inv || leading));
    }
    auto want = Flat::from(base_symbol(rho));
    want += Flat::from(r.remainder);
    Flat low = cur.empty();
    for (const auto& [e, c] : cur.t)
        if (Flat::grading(e) < 8) low.add(e, c);
    CHECK(low.t == want.t);
}

TEST_CASE("normal form errors") {
    auto H = base_symbol(BaseJet(q(1)));
    H.add({0, 1, 1}, q(-2));  // rho = 0
    H.add({0, 2, 1}, q(1));
    CHECK_THROWS_AS(birkhoff_normal_form(H, 6), NonInvertibleRho);
    // x0-dependent rho is outside the supported class
    auto K = base_symbol(BaseJet(q(1)));
    K.add({0, 1, 1}, x0());
    CHECK_THROWS_AS(bnf_step(K, 3), UnsupportedSymbol);
    // a grading-2 generator against a non-invariant term: the conjugation never closes
    auto M = base_symbol(BaseJet(q(1)));
    M.add({1, 1, 1}, q(1));
    M.add({0, 3, 2}, q(1));
    M.add({0, 2, 3}, q(1));
    CHECK_THROWS_AS(birkhoff_normal_form(M, 6), NonTerminatingSeries);
    // malformed leading block
    auto B = base_symbol(BaseJet(q(1)));
    B.add({0, 2, 0}, q(1));
    CHECK_THROWS_AS(birkhoff_normal_form(B, 6), ConfigError);
}
