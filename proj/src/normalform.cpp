#include "qc/normalform.hpp"

#include <algorithm>
#include <sstream>

namespace qc {

// ---------------------------------------------------------------------------
// Gaussian rationals

GaussRational& GaussRational::operator+=(const GaussRational& o) {
    re += o.re;
    im += o.im;
    return *this;
}
GaussRational& GaussRational::operator-=(const GaussRational& o) {
    re -= o.re;
    im -= o.im;
    return *this;
}
GaussRational operator*(const GaussRational& a, const GaussRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
GaussRational operator/(const GaussRational& a, const GaussRational& b) {
    Rational n = b.re * b.re + b.im * b.im;
    if (n == 0) throw std::domain_error("division by zero");
    return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
}

std::string GaussRational::str() const {
    std::ostringstream o;
    o << re;
    if (im != 0) o << (im > 0 ? "+" : "-") << abs(im) << "i";
    return o.str();
}

namespace {

Rational parse_rational(std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), ::isspace), s.end());
    if (s.empty()) throw ConfigError("empty rational");
    try {
        auto dot = s.find('.');
        if (dot == std::string::npos) return Rational(s);
        // decimal literal, taken exactly
        bool neg = s[0] == '-';
        std::string body = s.substr((neg || s[0] == '+') ? 1 : 0);
        dot = body.find('.');
        std::string digits = body.substr(0, dot) + body.substr(dot + 1);
        std::size_t frac = body.size() - dot - 1;
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) throw std::runtime_error("");
        digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));  // no octal
        boost::multiprecision::cpp_int num(digits), den(1);
        for (std::size_t i = 0; i < frac; ++i) den *= 10;
        Rational r(num, den);
        return neg ? Rational(-r) : r;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("not a rational number: '" + s + "'");
    }
}

}  // namespace

GaussRational parse_gauss(const std::string& re, const std::string& im) {
    return {parse_rational(re), parse_rational(im)};
}

// ---------------------------------------------------------------------------
// base jets

void BaseJet::add(const BaseExp& e, const GaussRational& c) {
    if (c.is_zero()) return;
    auto it = t_.find(e);
    if (it == t_.end()) {
        t_.emplace(e, c);
        return;
    }
    it->second += c;
    if (it->second.is_zero()) t_.erase(it);
}

GaussRational BaseJet::constant() const {
    auto it = t_.find({0, 0, 0, 0});
    return it == t_.end() ? GaussRational() : it->second;
}

int BaseJet::x0_degree() const {
    int d = 0;
    for (const auto& [e, c] : t_) d = std::max(d, e[0]);
    return d;
}

BaseJet& BaseJet::operator+=(const BaseJet& o) {
    for (const auto& [e, c] : o.t_) add(e, c);
    return *this;
}
BaseJet& BaseJet::operator-=(const BaseJet& o) {
    for (const auto& [e, c] : o.t_) add(e, -c);
    return *this;
}

BaseJet BaseJet::scaled(const GaussRational& c) const {
    BaseJet r;
    if (c.is_zero()) return r;
    for (const auto& [e, v] : t_) r.t_.emplace(e, v * c);
    return r;
}

BaseJet BaseJet::conj() const {
    BaseJet r;
    for (const auto& [e, v] : t_) r.t_.emplace(e, v.conj());
    return r;
}

BaseJet BaseJet::mul(const BaseJet& o, int order) const {
    BaseJet r;
    for (const auto& [e1, c1] : t_)
        for (const auto& [e2, c2] : o.t_) {
            if (e1[1] + e1[2] + e1[3] + e2[1] + e2[2] + e2[3] > order) continue;
            r.add({e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2], e1[3] + e2[3]}, c1 * c2);
        }
    return r;
}

BaseJet BaseJet::d_x0() const {
    BaseJet r;
    for (const auto& [e, c] : t_)
        if (e[0] > 0) r.add({e[0] - 1, e[1], e[2], e[3]}, c * GaussRational(e[0]));
    return r;
}

BaseJet BaseJet::int_x0() const {
    BaseJet r;
    for (const auto& [e, c] : t_) r.add({e[0] + 1, e[1], e[2], e[3]}, c / GaussRational(e[0] + 1));
    return r;
}

BaseJet BaseJet::inverse(int order) const {
    if (depends_on_x0()) throw UnsupportedSymbol("jet inverse needs an x0-independent jet");
    GaussRational c0 = constant();
    if (c0.is_zero()) throw NonInvertibleRho("constant term vanishes");
    GaussRational ic = GaussRational(1) / c0;
    // 1/j = ic * sum_k (-u)^k, u = j*ic - 1 has no constant term so the sum stops at `order`
    BaseJet u = scaled(ic);
    u.add({0, 0, 0, 0}, GaussRational(-1));
    BaseJet mu = u.scaled(GaussRational(-1));
    BaseJet sum(GaussRational(1)), p(GaussRational(1));
    for (int k = 1; k <= order; ++k) {
        p = p.mul(mu, order);
        if (p.is_zero()) break;
        sum += p;
    }
    return sum.scaled(ic);
}

// ---------------------------------------------------------------------------
// jet symbols

const BaseJet& JetSymbol::coefficient(const Monomial& m) const {
    static const BaseJet zero;
    auto it = t_.find(m);
    return it == t_.end() ? zero : it->second;
}

void JetSymbol::add(const Monomial& m, const BaseJet& c) {
    if (c.is_zero()) return;
    if (m.a < 0 || m.b < 0 || m.c < 0) throw std::logic_error("negative exponent");
    if (m.grading() > nmax_) {
        truncated_ = true;
        return;
    }
    auto it = t_.find(m);
    if (it == t_.end()) {
        // truncate the base jet to our order
        BaseJet t;
        for (const auto& [e, v] : c.terms())
            if (e[1] + e[2] + e[3] <= base_order_) t.add(e, v);
        if (!t.is_zero()) t_.emplace(m, std::move(t));
        return;
    }
    for (const auto& [e, v] : c.terms())
        if (e[1] + e[2] + e[3] <= base_order_) it->second.add(e, v);
    if (it->second.is_zero()) t_.erase(it);
}

JetSymbol& JetSymbol::operator+=(const JetSymbol& o) {
    for (const auto& [m, c] : o.t_) add(m, c);
    truncated_ = truncated_ || o.truncated_;
    return *this;
}
JetSymbol& JetSymbol::operator-=(const JetSymbol& o) {
    for (const auto& [m, c] : o.t_) add(m, c.scaled(GaussRational(-1)));
    truncated_ = truncated_ || o.truncated_;
    return *this;
}

JetSymbol JetSymbol::scaled(const GaussRational& c) const {
    JetSymbol r(nmax_, base_order_);
    r.truncated_ = truncated_;
    if (c.is_zero()) return r;
    for (const auto& [m, v] : t_) r.t_.emplace(m, v.scaled(c));
    return r;
}

JetSymbol JetSymbol::grading_part(int g) const {
    JetSymbol r(nmax_, base_order_);
    for (const auto& [m, v] : t_)
        if (m.grading() == g) r.t_.emplace(m, v);
    return r;
}

JetSymbol JetSymbol::below(int g) const {
    JetSymbol r(nmax_, base_order_);
    for (const auto& [m, v] : t_)
        if (m.grading() < g) r.t_.emplace(m, v);
    return r;
}

JetSymbol JetSymbol::conj() const {
    JetSymbol r(nmax_, base_order_);
    r.truncated_ = truncated_;
    for (const auto& [m, v] : t_) r.t_.emplace(Monomial{m.a, m.c, m.b}, v.conj());
    return r;
}

int JetSymbol::max_x0_degree() const {
    int d = 0;
    for (const auto& [m, v] : t_) d = std::max(d, v.x0_degree());
    return d;
}

JetSymbol poisson_bracket(const JetSymbol& f, const JetSymbol& g, Overflow mode) {
    const int order = std::min(f.base_order(), g.base_order());
    JetSymbol r(std::min(f.nmax(), g.nmax()), order);
    const GaussRational m2i(0, -2);
    auto put = [&](const Monomial& m, const BaseJet& c) {
        if (c.is_zero()) return;
        if (m.grading() > r.nmax() && mode == Overflow::Throw)
            throw TruncationOverflow("bracket needs grading " + std::to_string(m.grading()) + " > " +
                                     std::to_string(r.nmax()));
        r.add(m, c);
    };
    for (const auto& [mf, cf] : f.terms()) {
        const BaseJet dcf = cf.d_x0();
        for (const auto& [mg, cg] : g.terms()) {
            // d_x0 f d_xi0 g
            if (mg.a > 0 && !dcf.is_zero())
                put({mf.a + mg.a - 1, mf.b + mg.b, mf.c + mg.c}, dcf.mul(cg, order).scaled(GaussRational(mg.a)));
            // - d_xi0 f d_x0 g
            if (mf.a > 0) {
                BaseJet dcg = cg.d_x0();
                if (!dcg.is_zero())
                    put({mf.a + mg.a - 1, mf.b + mg.b, mf.c + mg.c}, cf.mul(dcg, order).scaled(GaussRational(-mf.a)));
            }
            // -2i (d_z f d_zbar g - d_zbar f d_z g)
            const long long k = (long long)mf.b * mg.c - (long long)mf.c * mg.b;
            if (k != 0)
                put({mf.a + mg.a, mf.b + mg.b - 1, mf.c + mg.c - 1}, cf.mul(cg, order).scaled(m2i * GaussRational(k)));
        }
    }
    if (f.truncated() || g.truncated()) r.set_truncated(true);
    return r;
}

JetSymbol conjugate(const JetSymbol& G, const JetSymbol& H, int max_terms) {
    JetSymbol out = H, term = H;
    for (int k = 1;; ++k) {
        term = poisson_bracket(G, term).scaled(GaussRational(Rational(1, k)));
        out.set_truncated(out.truncated() || term.truncated());
        if (term.is_zero()) break;
        if (k >= max_terms)
            throw NonTerminatingSeries("exp-ad series still nonzero after " + std::to_string(max_terms) +
                                       " terms (grading-preserving generator against non-invariant terms)");
        out += term;
    }
    return out;
}

// ---------------------------------------------------------------------------
// normal form

namespace {

BaseJet rho_of(const JetSymbol& s) {
    BaseJet rho = s.coefficient({0, 1, 1}).scaled(GaussRational(Rational(1, 2)));
    if (rho.constant().is_zero()) throw NonInvertibleRho("the z z̄ coefficient has no constant term");
    if (rho.depends_on_x0()) throw UnsupportedSymbol("rho must not depend on x0");
    for (const auto& [e, c] : rho.terms())
        if (c.im != 0) throw UnsupportedSymbol("rho must be real");
    return rho;
}

// coefficient still to be removed at (a,b,c); the leading xi0^2 carries 1
BaseJet defect(const Monomial& m, const BaseJet& c) {
    if (m.a == 2 && m.b == 0 && m.c == 0) {
        BaseJet d = c;
        d.add({0, 0, 0, 0}, GaussRational(-1));
        return d;
    }
    return c;
}

JetSymbol non_invariant(const JetSymbol& s, int N) {
    JetSymbol r(s.nmax(), s.base_order());
    for (const auto& [m, c] : s.terms())
        if (m.grading() == N && !m.invariant()) r.add(m, defect(m, c));
    return r;
}

}  // namespace

JetSymbol leading_block(const BaseJet& rho, int nmax, int base_order) {
    JetSymbol s(nmax, base_order);
    s.add({2, 0, 0}, GaussRational(1));
    s.add({0, 1, 1}, rho.scaled(GaussRational(2)));
    return s;
}

JetSymbol omega_generator(int nmax, int base_order) {
    JetSymbol s(nmax, base_order);
    s.add({0, 1, 1}, GaussRational(1));
    return s;
}

BNFStep bnf_step(const JetSymbol& current, int N) {
    if (N < 3) throw ConfigError("normal form steps start at grading 3");
    if (N > current.nmax()) throw ConfigError("step grading above the truncation order");
    const BaseJet rho = rho_of(current);
    const BaseJet irho = rho.inverse(current.base_order());
    // the xi0^2 coefficient is normalized at grading 4; later levels rely on it being 1
    if (N > 4 && !(current.coefficient({2, 0, 0}) == BaseJet(GaussRational(1))))
        throw UnsupportedSymbol("the xi0^2 coefficient must be exactly 1");

    BNFStep st{JetSymbol(current.nmax(), current.base_order()), JetSymbol(current.nmax(), current.base_order()), current};
    const JetSymbol low = current.below(N);
    // a b=c generator is one grading lower and can leave a smaller-a term behind through x0-dependent
    // invariant terms, so the step repeats until the grading-N part is clean
    for (; st.passes < 2 * N + 2; ++st.passes) {
        JetSymbol r = non_invariant(st.next, N);
        if (r.is_zero()) break;
        JetSymbol G(current.nmax(), current.base_order());
        for (const auto& [m, c] : r.terms()) {
            if (m.b != m.c) {
                // s = r / (4 i rho (b - c))
                // (boost::rational rejects negative cpp_int denominators)
                const int d = m.b - m.c;
                GaussRational k(0, Rational(d > 0 ? -1 : 1, 4 * std::abs(d)));
                G.add(m, c.mul(irho, current.base_order()).scaled(k));
            } else {
                // s = -1/2 int_0^x0 r on xi0^(a-1) (z z̄)^b
                G.add({m.a - 1, m.b, m.c}, c.int_x0().scaled(GaussRational(Rational(-1, 2))));
            }
        }
        st.next = conjugate(G, st.next);
        st.generator += G;
    }
    if (!non_invariant(st.next, N).is_zero())
        throw ResonanceLeak("non-invariant grading-" + std::to_string(N) + " terms survive the step");
    if (!(st.next.below(N) == low)) throw ResonanceLeak("step modified gradings below " + std::to_string(N));
    for (const auto& [m, c] : st.next.terms())
        if (m.grading() == N && m.invariant()) st.remainder.add(m, c);
    return st;
}

BNFResult birkhoff_normal_form(const JetSymbol& initial, int nmax) {
    if (nmax < 3) throw ConfigError("nmax must be at least 3");
    JetSymbol cur(nmax, initial.base_order());
    cur += initial;
    for (const auto& [m, c] : cur.terms()) {
        if (m.grading() < 2) throw ConfigError("terms of grading below 2");
        if (m.grading() == 2 && !(m == Monomial{0, 1, 1})) throw ConfigError("grading-2 part must be 2 rho z z̄");
    }
    BNFResult r;
    r.rho = rho_of(cur);
    r.generator = JetSymbol(nmax, initial.base_order());
    r.remainder = JetSymbol(nmax, initial.base_order());
    // invariant terms of grading 4 .. are part of R from the start; bnf_step reports them per level
    for (int N = 3; N < nmax; ++N) {
        auto st = bnf_step(cur, N);
        r.generator += st.generator;
        r.steps.push_back(st.generator);
        r.remainder += st.remainder;
        cur = std::move(st.next);
    }
    r.truncated = cur.truncated();
    r.residual = JetSymbol(nmax, initial.base_order());
    for (const auto& [m, c] : cur.terms())
        if (m.grading() >= nmax) r.residual.add(m, c);
    r.normal = std::move(cur);
    return r;
}

std::string verify_bnf(const JetSymbol& initial, const BNFResult& r) {
    const int nmax = r.normal.nmax();
    JetSymbol cur(nmax, initial.base_order());
    cur += initial;
    for (const auto& G : r.steps) cur = conjugate(G, cur);
    JetSymbol want = leading_block(r.rho, nmax, initial.base_order());
    want += r.remainder;
    JetSymbol diff = cur.below(nmax);
    diff -= want;
    if (!diff.is_zero()) return "re-expansion differs from the normal form below grading " + std::to_string(nmax);
    for (const auto& [m, c] : r.remainder.terms())
        if (!m.invariant()) return "remainder has a non-invariant monomial";
    if (!poisson_bracket(omega_generator(nmax, initial.base_order()), r.remainder).is_zero())
        return "remainder does not commute with z z̄";
    if (initial.is_real() && !(r.generator.is_real() && r.remainder.is_real())) return "reality lost";
    return "";
}

}  // namespace qc
