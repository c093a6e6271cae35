#include <algorithm>
#include <cmath>
#include <random>

#include "qc/spectral.hpp"

namespace qc {

DenseOperator::DenseOperator(Eigen::MatrixXcd m) : m_(std::move(m)), w_(std::size_t(m_.rows()), 1.0) {
    if (m_.rows() != m_.cols()) throw ConfigError("dense operator must be square");
}

void DenseOperator::apply(const cplx* in, cplx* out) const {
    Eigen::Map<const Eigen::VectorXcd> x(in, m_.cols());
    Eigen::Map<Eigen::VectorXcd> y(out, m_.rows());
    y.noalias() = m_ * x;
}

SparseOperator::SparseOperator(int n, std::vector<Entry> entries)
    : n_(n), entries_(std::move(entries)), w_(std::size_t(n), 1.0) {
    for (const auto& e : entries_)
        if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n) throw ConfigError("sparse entry out of range");
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
}

void SparseOperator::apply(const cplx* in, cplx* out) const {
    std::fill(out, out + n_, cplx(0.0));
    for (const auto& e : entries_) out[e.row] += e.value * in[e.col];
}

namespace {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// B = W^{1/2} A W^{-1/2} is Hermitian in the plain inner product
struct Scaled {
    const LinearOperator& op;
    Eigen::VectorXd sw, isw;
    mutable Vec tin, tout;
    explicit Scaled(const LinearOperator& o) : op(o) {
        const auto& w = o.weights();
        const Eigen::Index n = Eigen::Index(o.dim());
        sw.resize(n);
        isw.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            sw[i] = std::sqrt(w[std::size_t(i)]);
            isw[i] = 1.0 / sw[i];
        }
        tin.resize(n);
        tout.resize(n);
    }
    void apply(const cplx* y, cplx* out) const {
        for (Eigen::Index i = 0; i < tin.size(); ++i) tin[i] = y[i] * isw[i];
        op.apply(tin.data(), tout.data());
        for (Eigen::Index i = 0; i < tin.size(); ++i) out[i] = tout[i] * sw[i];
    }
};

Mat dense_matrix(const Scaled& B) {
    const Eigen::Index n = B.sw.size();
    Mat M(n, n);
    Vec e = Vec::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        e[j] = 1.0;
        B.apply(e.data(), M.col(j).data());
        e[j] = 0.0;
    }
    return 0.5 * (M + M.adjoint());
}

// orthonormalize the columns of blk against V(:, :m) and among themselves; columns that
// collapse are replaced by fresh random directions
void orthonormalize(const Mat& V, Eigen::Index m, Mat& blk, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    for (Eigen::Index c = 0; c < blk.cols(); ++c) {
        for (int attempt = 0; attempt < 4; ++attempt) {
            double n0 = blk.col(c).norm();
            for (int pass = 0; pass < 2; ++pass) {
                if (m > 0) blk.col(c) -= V.leftCols(m) * (V.leftCols(m).adjoint() * blk.col(c));
                if (c > 0) blk.col(c) -= blk.leftCols(c) * (blk.leftCols(c).adjoint() * blk.col(c));
            }
            double n1 = blk.col(c).norm();
            if (n1 > 1e-10 * std::max(n0, 1e-300)) {
                blk.col(c) /= n1;
                break;
            }
            for (Eigen::Index i = 0; i < blk.rows(); ++i) blk(i, c) = cplx(g(rng), g(rng));
        }
    }
}

EigenPairs finish(const Scaled& B, const Eigen::VectorXd& vals, const Mat& Y, int count, int apps,
                  int restarts) {
    EigenPairs out;
    const Eigen::Index n = B.sw.size();
    out.vectors.resize(n, count);
    Vec r(n);
    for (int j = 0; j < count; ++j) {
        out.values.push_back(vals[j]);
        B.apply(Y.col(j).data(), r.data());
        r -= vals[j] * Y.col(j);
        out.residuals.push_back(r.norm());
        out.vectors.col(j) = Y.col(j).cwiseProduct(B.isw.cast<cplx>());
    }
    out.applications = apps;
    out.restarts = restarts;
    return out;
}

}  // namespace

std::vector<double> dense_eigenvalues(const LinearOperator& op) {
    Scaled B(op);
    Eigen::SelfAdjointEigenSolver<Mat> es(dense_matrix(B), Eigen::EigenvaluesOnly);
    auto v = es.eigenvalues();
    return std::vector<double>(v.data(), v.data() + v.size());
}

EigenPairs lowest_eigenpairs(const LinearOperator& op, int count, double tol, const EigenOptions& opt) {
    const Eigen::Index n = Eigen::Index(op.dim());
    if (count <= 0 || count > n) throw ConfigError("eigenpair count out of range");
    Scaled B(op);
    if (n <= 4 * std::max(opt.block, count) || n <= 64) {
        Eigen::SelfAdjointEigenSolver<Mat> es(dense_matrix(B));
        return finish(B, es.eigenvalues(), es.eigenvectors(), count, int(n), 0);
    }

    const int b = std::max(1, opt.block);
    const Eigen::Index mmax = std::min<Eigen::Index>(std::max(opt.max_basis, 2 * count + 3 * b), n);
    const Eigen::Index keep = std::min<Eigen::Index>(std::max<Eigen::Index>(count + b, mmax / 2), mmax - b);
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> g;

    Mat V(n, mmax), AV(n, mmax);
    Mat blk(n, b);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int c = 0; c < b; ++c) blk(i, c) = cplx(g(rng), g(rng));
    Eigen::Index m = 0;
    int apps = 0, restarts = 0, steps = 0;
    Eigen::VectorXd theta;
    Mat Y;

    while (true) {
        orthonormalize(V, m, blk, rng);
        V.middleCols(m, b) = blk;
        for (int c = 0; c < b; ++c) B.apply(V.col(m + c).data(), AV.col(m + c).data());
        apps += b;
        m += b;
        ++steps;
        const bool full = m + b > mmax;
        if (steps % std::max(1, opt.check_every) != 0 && !full && m < n) {
            blk = AV.middleCols(m - b, b);
            continue;
        }
        Mat H = V.leftCols(m).adjoint() * AV.leftCols(m);
        H = 0.5 * (H + H.adjoint());
        Eigen::SelfAdjointEigenSolver<Mat> es(H);
        theta = es.eigenvalues();
        Y = es.eigenvectors();
        const int nc = int(std::min<Eigen::Index>(count, m));
        Mat X = V.leftCols(m) * Y.leftCols(nc);
        Mat R = AV.leftCols(m) * Y.leftCols(nc) - X * theta.head(nc).asDiagonal();
        std::vector<int> open;
        for (int j = 0; j < nc; ++j)
            if (R.col(j).norm() > tol) open.push_back(j);
        if (nc == count && open.empty()) {
            // residuals recomputed with fresh applications
            auto res = finish(B, theta, X, count, apps + count, restarts);
            bool ok = true;
            for (double r : res.residuals) ok = ok && r <= tol;
            if (ok) return res;
        }
        if (m >= n) throw NoConvergence("Krylov space exhausted before residuals fell below tolerance");
        if (full) {
            if (++restarts > opt.max_restarts)
                throw NoConvergence("eigensolver stalled after " + std::to_string(opt.max_restarts) +
                                    " restarts");
            Mat Vk = V.leftCols(m) * Y.leftCols(keep);
            Mat AVk = AV.leftCols(m) * Y.leftCols(keep);
            V.leftCols(keep) = Vk;
            AV.leftCols(keep) = AVk;
            m = keep;
            // continue with the residual directions of the unconverged Ritz pairs
            for (int c = 0; c < b; ++c) {
                int j = c < int(open.size()) ? open[std::size_t(c)] : std::min<int>(int(keep) - 1, nc + c);
                blk.col(c) = AVk.col(j) - theta[j] * Vk.col(j);
            }
        } else {
            blk = AV.middleCols(m - b, b);
        }
    }
}

}  // namespace qc
