#include "robustmc/matrix.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>

namespace robustmc {

Matrix SvdFactors::reconstruct() const {
    return U * sigma.asDiagonal() * V.transpose();
}

Eigen::Index SvdFactors::numerical_rank(double rel_threshold) const {
    if (sigma.size() == 0 || sigma(0) <= 0.0) return 0;
    const double cut = rel_threshold * sigma(0);
    Eigen::Index k = 0;
    while (k < sigma.size() && sigma(k) > cut) ++k;
    return k;
}

SvdFactors svd(const Matrix& a) {
    require_finite(a, "svd");
    const Eigen::Index k = std::min(a.rows(), a.cols());
    if (k == 0) {
        return {Matrix(a.rows(), 0), Vector(0), Matrix(a.cols(), 0)};
    }
    // BDCSVD falls back to one-sided Jacobi below its block size; both
    // iterate to a fixed internal sweep cap and report NoConvergence.
    Eigen::BDCSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success) {
        throw SvdError("svd: singular value iteration did not converge");
    }
    SvdFactors f{dec.matrixU(), dec.singularValues(), dec.matrixV()};
    if (!all_finite(f.U) || !f.sigma.allFinite() || !all_finite(f.V)) {
        throw SvdError("svd: non-finite factors");
    }
    return f;
}

double norm(const Matrix& a, NormKind kind) {
    if (a.size() == 0) return 0.0;
    switch (kind) {
        case NormKind::nuclear:
            return svd(a).sigma.sum();
        case NormKind::spectral:
            return svd(a).sigma(0);
        case NormKind::entry_inf:
            return a.cwiseAbs().maxCoeff();
        case NormKind::one_two:
            return a.colwise().norm().sum();
        case NormKind::inf_two:
            return a.colwise().norm().maxCoeff();
        case NormKind::frobenius:
            return a.norm();
    }
    throw std::invalid_argument("norm: unknown kind");
}

NormKind parse_norm_kind(const std::string& name) {
    if (name == "nuclear") return NormKind::nuclear;
    if (name == "spectral") return NormKind::spectral;
    if (name == "entry_inf") return NormKind::entry_inf;
    if (name == "one_two") return NormKind::one_two;
    if (name == "inf_two") return NormKind::inf_two;
    if (name == "frobenius") return NormKind::frobenius;
    throw std::invalid_argument("unknown norm kind: " + name);
}

double inner(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "inner");
    return a.cwiseProduct(b).sum();
}

bool all_finite(const Matrix& a) { return a.allFinite(); }

void require_finite(const Matrix& a, const char* what) {
    if (!a.allFinite()) {
        throw std::invalid_argument(std::string(what) + ": matrix has non-finite entries");
    }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                    " vs " + std::to_string(b.rows()) + "x" +
                                    std::to_string(b.cols()) + ")");
    }
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

void write_matrix(std::ostream& out, const Matrix& a) {
    out << a.rows() << ' ' << a.cols() << '\n';
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (j) out << ' ';
            out << a(i, j);
        }
        out << '\n';
    }
    out.precision(old);
}

Matrix read_matrix(std::istream& in) {
    long rows = -1, cols = -1;
    if (!(in >> rows >> cols) || rows < 0 || cols < 0) {
        throw std::runtime_error("read_matrix: bad header");
    }
    Matrix a(rows, cols);
    for (long i = 0; i < rows; ++i) {
        for (long j = 0; j < cols; ++j) {
            if (!(in >> a(i, j))) throw std::runtime_error("read_matrix: truncated data");
        }
    }
    require_finite(a, "read_matrix");
    return a;
}

void save_matrix(const std::string& path, const Matrix& a) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_matrix(out, a);
    if (!out) throw std::runtime_error("write failed: " + path);
}

Matrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_matrix(in);
}

}  // namespace robustmc
