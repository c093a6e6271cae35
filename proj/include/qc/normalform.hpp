#pragma once
// Formal normal form of symbols in (xi0, z, zbar) over exact Gaussian-rational jets in the base
// variables (x0, x2, x3, xi2).  x0 is kept as an exact polynomial since the homological equation
// integrates in it; the other base variables are truncated at a fixed total order.

#include <boost/multiprecision/cpp_int.hpp>

#include <array>
#include <compare>
#include <map>
#include <string>
#include <vector>

#include "qc/errors.hpp"

namespace qc {

using Rational = boost::multiprecision::cpp_rational;

struct GaussRational {
    Rational re, im;
    GaussRational() = default;
    GaussRational(Rational r, Rational i = 0) : re(std::move(r)), im(std::move(i)) {}
    GaussRational(long long r) : re(r), im(0) {}
    bool is_zero() const { return re == 0 && im == 0; }
    GaussRational conj() const { return {re, -im}; }
    GaussRational& operator+=(const GaussRational& o);
    GaussRational& operator-=(const GaussRational& o);
    friend GaussRational operator+(GaussRational a, const GaussRational& b) { return a += b; }
    friend GaussRational operator-(GaussRational a, const GaussRational& b) { return a -= b; }
    friend GaussRational operator-(const GaussRational& a) { return {-a.re, -a.im}; }
    friend GaussRational operator*(const GaussRational& a, const GaussRational& b);
    friend GaussRational operator/(const GaussRational& a, const GaussRational& b);
    friend bool operator==(const GaussRational& a, const GaussRational& b) { return a.re == b.re && a.im == b.im; }
    std::string str() const;
};
GaussRational parse_gauss(const std::string& re, const std::string& im = "0");

// exponents of (x0, x2, x3, xi2)
using BaseExp = std::array<int, 4>;

// polynomial in the base variables; other than x0 truncated at total degree `order`
class BaseJet {
public:
    BaseJet() = default;
    BaseJet(GaussRational c) { add({0, 0, 0, 0}, std::move(c)); }
    static BaseJet monomial(BaseExp e, GaussRational c) {
        BaseJet j;
        j.add(e, std::move(c));
        return j;
    }

    void add(const BaseExp& e, const GaussRational& c);
    bool is_zero() const { return t_.empty(); }
    const std::map<BaseExp, GaussRational>& terms() const { return t_; }
    GaussRational constant() const;
    int x0_degree() const;
    bool depends_on_x0() const { return x0_degree() > 0; }

    BaseJet& operator+=(const BaseJet& o);
    BaseJet& operator-=(const BaseJet& o);
    BaseJet scaled(const GaussRational& c) const;
    BaseJet conj() const;
    BaseJet mul(const BaseJet& o, int order) const;
    BaseJet d_x0() const;
    BaseJet int_x0() const;  // primitive vanishing at x0 = 0
    // inverse in the truncated ring, x0-independent jets only
    BaseJet inverse(int order) const;
    friend bool operator==(const BaseJet& a, const BaseJet& b) { return a.t_ == b.t_; }

private:
    std::map<BaseExp, GaussRational> t_;
};

struct Monomial {
    int a = 0, b = 0, c = 0;  // powers of xi0, z, zbar
    int grading() const { return 2 * a + b + c; }
    bool invariant() const { return a == 0 && b == c; }
    auto operator<=>(const Monomial&) const = default;
};

class JetSymbol {
public:
    JetSymbol(int nmax = 8, int base_order = 2) : nmax_(nmax), base_order_(base_order) {}

    int nmax() const { return nmax_; }
    int base_order() const { return base_order_; }
    bool truncated() const { return truncated_; }
    void set_truncated(bool t) { truncated_ = t; }
    const std::map<Monomial, BaseJet>& terms() const { return t_; }
    const BaseJet& coefficient(const Monomial& m) const;

    // adds c * m; drops (and flags) monomials above nmax
    void add(const Monomial& m, const BaseJet& c);
    void add(const Monomial& m, const GaussRational& c) { add(m, BaseJet(c)); }
    JetSymbol& operator+=(const JetSymbol& o);
    JetSymbol& operator-=(const JetSymbol& o);
    JetSymbol scaled(const GaussRational& c) const;
    JetSymbol grading_part(int g) const;
    JetSymbol below(int g) const;  // gradings < g
    JetSymbol conj() const;        // complex conjugation of the function (swaps z and zbar)
    bool is_zero() const { return t_.empty(); }
    bool is_real() const { return *this == conj(); }
    int max_x0_degree() const;
    friend bool operator==(const JetSymbol& a, const JetSymbol& b) { return a.t_ == b.t_; }

private:
    int nmax_, base_order_;
    bool truncated_ = false;
    std::map<Monomial, BaseJet> t_;
};

// {f,g} = (d_x0 f d_xi0 g - d_xi0 f d_x0 g) - 2i (d_z f d_zbar g - d_zbar f d_z g)
// so {x0, xi0} = 1, {z z̄, z} = 2i z and {2 rho z z̄, z^b z̄^c} = 4i rho (b-c) z^b z̄^c.
enum class Overflow { Flag, Throw };
JetSymbol poisson_bracket(const JetSymbol& f, const JetSymbol& g, Overflow mode = Overflow::Flag);

// exp(ad_G) H = sum_k ad_G^k H / k!, ad_G = {G, .}; terminates by grading unless G has grading 2
JetSymbol conjugate(const JetSymbol& G, const JetSymbol& H, int max_terms = 64);

struct BNFStep {
    JetSymbol generator;        // g increment
    JetSymbol remainder;        // invariant grading-N part moved into R
    JetSymbol next;
    int passes = 0;
};
BNFStep bnf_step(const JetSymbol& current, int N);

struct BNFResult {
    JetSymbol generator;             // sum of the step generators
    std::vector<JetSymbol> steps;    // generators in application order (N = 3, 4, ...)
    JetSymbol remainder;             // a = 0, b = c, grading in [4, nmax)
    JetSymbol residual;              // grading >= nmax part of the conjugated symbol
    JetSymbol normal;                // conjugated symbol, gradings <= nmax
    BaseJet rho;                     // half the z z̄ coefficient
    bool truncated = false;
};
BNFResult birkhoff_normal_form(const JetSymbol& initial, int nmax);

// checks of the result against the definitions; return the largest violation as text, "" if clean
std::string verify_bnf(const JetSymbol& initial, const BNFResult& r);

// the leading block xi0^2 + 2 rho z z̄ with constant rho
JetSymbol leading_block(const BaseJet& rho, int nmax, int base_order = 2);
// z z̄, whose bracket generates the angular rotation
JetSymbol omega_generator(int nmax, int base_order = 2);

}  // namespace qc
