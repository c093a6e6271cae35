#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "qc/spectral.hpp"

extern "C" void dstevr_(const char* jobz, const char* range, const int* n, double* d, double* e,
                        const double* vl, const double* vu, const int* il, const int* iu,
                        const double* abstol, int* m, double* w, double* z, const int* ldz, int* isuppz,
                        double* work, const int* lwork, int* iwork, const int* liwork, int* info);

namespace qc {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kFourPi2 = 4.0 * kPi * kPi;

long long two_square_count(long long r2) {
    long long c = 0;
    for (long long a = 0; a * a <= r2; ++a) {
        long long b2 = r2 - a * a;
        long long b = std::llround(std::sqrt(double(b2)));
        while (b * b > b2) --b;
        while ((b + 1) * (b + 1) <= b2) ++b;
        if (b * b != b2) continue;
        // (+-a, +-b) with the zero cases counted once
        c += (a == 0 ? 1 : 2) * (b == 0 ? 1 : 2);
    }
    return c;
}

// eigenpairs of a symmetric tridiagonal matrix in (-inf, upper]
void tridiagonal(std::vector<double> d, std::vector<double> e, double upper, bool vectors,
                 std::vector<double>& values, Eigen::MatrixXd& z) {
    const int n = int(d.size());
    e.resize(std::size_t(n));
    const char jobz = vectors ? 'V' : 'N', range = 'V';
    const double vl = -1.0, abstol = 0.0;
    const int il = 0, iu = 0;
    int m = 0, info = 0;
    std::vector<double> w(static_cast<std::size_t>(n));
    const int ldz = vectors ? n : 1;
    std::vector<double> zz(vectors ? std::size_t(n) * n : 1);
    std::vector<int> isuppz(2 * std::size_t(n));
    int lwork = 20 * n, liwork = 10 * n;
    std::vector<double> work(static_cast<std::size_t>(lwork));
    std::vector<int> iwork(static_cast<std::size_t>(liwork));
    dstevr_(&jobz, &range, &n, d.data(), e.data(), &vl, &upper, &il, &iu, &abstol, &m, w.data(),
            zz.data(), &ldz, isuppz.data(), work.data(), &lwork, iwork.data(), &liwork, &info);
    if (info != 0) throw NoConvergence("tridiagonal eigensolver failed (info " + std::to_string(info) + ")");
    values.assign(w.begin(), w.begin() + m);
    if (vectors) z = Eigen::Map<Eigen::MatrixXd>(zz.data(), n, n).leftCols(m);
}
}  // namespace

long long SpectrumResult::total() const {
    long long t = 0;
    for (auto m : multiplicities) t += m;
    return t;
}

HillModes hill_modes(double r2, int parity, double lambda_max) {
    HillModes h;
    h.r2 = r2;
    h.parity = parity & 1;
    // the coupling reaches k ~ r; beyond that the coefficients decay geometrically
    int K = int(std::ceil(std::sqrt(r2) + std::sqrt(std::max(lambda_max, 0.0)) / (2 * kPi))) + 24;
    for (int k = -K; k <= K; ++k)
        if (((k % 2) + 2) % 2 == h.parity) h.k.push_back(k);
    const std::size_t n = h.k.size();
    std::vector<double> d(n), e(n > 0 ? n - 1 : 0);
    for (std::size_t i = 0; i < n; ++i) d[i] = kFourPi2 * h.k[i] * h.k[i] + 2 * kPi * kPi * r2;
    for (std::size_t i = 0; i + 1 < n; ++i) e[i] = -kPi * kPi * r2;
    tridiagonal(d, e, lambda_max, true, h.values, h.vectors);
    return h;
}

namespace {
// eigenvalues only, same truncation as hill_modes
std::vector<double> hill_values(double r2, int parity, double upper) {
    int K = int(std::ceil(std::sqrt(r2) + std::sqrt(std::max(upper, 0.0)) / (2 * kPi))) + 24;
    std::vector<double> d, e;
    for (int k = -K; k <= K; ++k)
        if (((k % 2) + 2) % 2 == parity) d.push_back(kFourPi2 * k * k + 2 * kPi * kPi * r2);
    e.assign(d.size() - 1, -kPi * kPi * r2);
    std::vector<double> v;
    Eigen::MatrixXd z;
    tridiagonal(d, e, upper, false, v, z);
    return v;
}
}  // namespace

SpectrumResult make_spectrum(std::vector<std::pair<double, long long>> raw, double lambda_max,
                             std::string model, std::string provenance) {
    std::sort(raw.begin(), raw.end());
    SpectrumResult s;
    s.model = std::move(model);
    s.provenance = std::move(provenance);
    s.lambda_max = lambda_max;
    for (const auto& [v, m] : raw) {
        if (v > lambda_max) break;
        if (m <= 0) continue;
        if (!s.eigenvalues.empty() &&
            std::abs(v - s.eigenvalues.back()) <= 1e-12 * std::max(1.0, std::abs(v)))
            s.multiplicities.back() += m;
        else {
            s.eigenvalues.push_back(v);
            s.multiplicities.push_back(m);
        }
    }
    return s;
}

SpectrumResult oracle_spectrum(const std::string& model, double lambda_max) {
    if (!(lambda_max >= 0)) throw ConfigError("lambda_max must be nonnegative");
    std::vector<std::pair<double, long long>> raw;
    auto add_circle = [&](double base, long long mult) {
        // base + 4 pi^2 m0^2 for all integers m0
        for (long long m0 = 0;; ++m0) {
            double v = base + kFourPi2 * double(m0 * m0);
            if (v > lambda_max) break;
            raw.emplace_back(v, m0 == 0 ? mult : 2 * mult);
        }
    };
    if (model == "trig_torus") {
        // the per-mode potential grows with r^2 = m1^2 + m2^2, so the ground energy is monotone
        // and the mode loop stops once both parity classes start above lambda_max
        for (long long r2 = 0;; ++r2) {
            long long c = two_square_count(r2);
            if (c == 0) continue;
            bool any = false;
            for (int p = 0; p < 2; ++p)
                for (double e : hill_values(double(r2), p, lambda_max)) {
                    any = true;
                    add_circle(e, c);
                }
            if (!any) break;
        }
    } else if (model == "heisenberg_circle") {
        // n = 0: flat 2-torus; n != 0: Landau levels 2 pi |n| (2j+1) with degeneracy |n|
        for (long long k1 = 0; kFourPi2 * double(k1 * k1) <= lambda_max; ++k1)
            for (long long k2 = 0; kFourPi2 * double(k1 * k1 + k2 * k2) <= lambda_max; ++k2)
                add_circle(kFourPi2 * double(k1 * k1 + k2 * k2), (k1 ? 2 : 1) * (k2 ? 2 : 1));
        for (long long n = 1; 2 * kPi * double(n) <= lambda_max; ++n)
            for (long long j = 0;; ++j) {
                double v = 2 * kPi * double(n) * double(2 * j + 1);
                if (v > lambda_max) break;
                add_circle(v, 2 * n);
            }
    } else {
        throw UnsupportedModel("no oracle spectrum for model '" + model + "'");
    }
    auto s = make_spectrum(std::move(raw), lambda_max, model, "oracle");
    s.certified = true;
    return s;
}

namespace {
std::vector<double> sector_values(const LinearOperator& op, const GridSpectrumOptions& opt, bool& dense,
                                  bool& certified) {
    if (op.dim() <= 1024) {
        dense = true;
        return dense_eigenvalues(op);
    }
    dense = false;
    int count = std::min<int>(opt.lowest + opt.eig.block, int(op.dim()));
    auto ep = lowest_eigenpairs(op, count, opt.tol, opt.eig);
    for (double r : ep.residuals) certified = certified && r <= opt.tol;
    return ep.values;
}
}  // namespace

SpectrumResult grid_spectrum(const GridLaplacian& lap, const GridSpectrumOptions& opt) {
    std::vector<std::pair<double, long long>> raw;
    double cut = std::numeric_limits<double>::infinity();
    bool certified = true;
    for (const auto& mode : lap.sector_modes()) {
        auto op = lap.sector(mode);
        bool dense = false;
        auto v = sector_values(op, opt, dense, certified);
        // a partial sector is complete only below its top computed value
        if (!dense && !v.empty()) cut = std::min(cut, v.back() * (1 - 1e-9));
        for (double x : v) raw.emplace_back(x, 1);
    }
    std::sort(raw.begin(), raw.end());
    if (raw.size() >= std::size_t(opt.lowest)) {
        // keep whole clusters: stop below the first value after the lowest-th one
        double lth = raw[std::size_t(opt.lowest) - 1].first;
        double next = std::numeric_limits<double>::infinity();
        for (const auto& r : raw)
            if (r.first > lth + 1e-8 * std::max(1.0, lth)) {
                next = r.first;
                break;
            }
        cut = std::min(cut, next * (1 - 1e-9));
    }
    auto s = make_spectrum(std::move(raw), cut, lap.structure().info().name, "grid");
    s.certified = certified;
    return s;
}

SpectrumResult heisenberg_grid_spectrum(int n, const GridSpectrumOptions& opt) {
    if (n < 8) throw ConfigError("grid sizes must be at least 8 per axis");
    // sectors |nn| <= n/4 are kept; every other sector starts at or above 2 pi (n/4 + 1)
    const int nmax = n / 4;
    const double cut = 2 * kPi * (nmax + 1) * (1 - 1e-9);
    std::vector<std::pair<double, long long>> raw;
    bool certified = true;
    for (int nn = 0; nn <= nmax; ++nn) {
        HeisenbergSectorOperator op(n, n, 0, nn);
        bool dense = false;
        auto v = sector_values(op, opt, dense, certified);
        if (!dense) throw ConfigError("heisenberg grid too large for dense sector certification");
        // sectors -nn and nn are complex conjugate
        for (double x : v)
            for (long long m0 = 0; x + kFourPi2 * double(m0 * m0) <= cut; ++m0)
                raw.emplace_back(x + kFourPi2 * double(m0 * m0), (nn ? 2 : 1) * (m0 ? 2 : 1));
    }
    auto s = make_spectrum(std::move(raw), cut, "heisenberg_circle", "grid");
    s.certified = certified;
    return s;
}

}  // namespace qc
