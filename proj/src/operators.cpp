#include "robustmc/operators.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace robustmc {

namespace {

void require_mask_shape(const Matrix& a, const ObservationMask& mask, const char* what) {
    if (a.rows() != mask.rows() || a.cols() != mask.cols()) {
        throw std::invalid_argument(std::string(what) + ": mask is " + std::to_string(mask.rows()) +
                                    "x" + std::to_string(mask.cols()) + ", matrix is " +
                                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
    }
}

void require_set_shape(const Matrix& a, const ColumnSet& set, const char* what) {
    if (a.cols() != set.n()) {
        throw std::invalid_argument(std::string(what) + ": column set over " +
                                    std::to_string(set.n()) + " columns, matrix has " +
                                    std::to_string(a.cols()));
    }
}

void require_nonnegative(double eps, const char* what) {
    if (!(eps >= 0.0)) throw std::invalid_argument(std::string(what) + ": threshold must be >= 0");
}

}  // namespace

// ---------------------------------------------------------------------------
// ObservationMask

ObservationMask::ObservationMask(Eigen::Index rows, Eigen::Index cols, std::vector<Entry> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("ObservationMask: negative dimension");
    for (const auto& e : entries_) {
        if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols) {
            throw std::invalid_argument("ObservationMask: entry (" + std::to_string(e.row) + ", " +
                                        std::to_string(e.col) + ") out of range");
        }
    }
    std::sort(entries_.begin(), entries_.end());
    if (std::adjacent_find(entries_.begin(), entries_.end()) != entries_.end()) {
        throw std::invalid_argument("ObservationMask: duplicate entry");
    }
}

ObservationMask ObservationMask::full(Eigen::Index rows, Eigen::Index cols) {
    std::vector<Entry> all;
    all.reserve(static_cast<std::size_t>(rows * cols));
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) all.push_back({i, j});
    return {rows, cols, std::move(all)};
}

ObservationMask ObservationMask::from_indicator(const Matrix& indicator) {
    std::vector<Entry> e;
    for (Eigen::Index i = 0; i < indicator.rows(); ++i)
        for (Eigen::Index j = 0; j < indicator.cols(); ++j)
            if (indicator(i, j) != 0.0) e.push_back({i, j});
    return {indicator.rows(), indicator.cols(), std::move(e)};
}

bool ObservationMask::contains(Eigen::Index i, Eigen::Index j) const {
    return std::binary_search(entries_.begin(), entries_.end(), Entry{i, j});
}

Matrix ObservationMask::indicator() const {
    Matrix m = Matrix::Zero(rows_, cols_);
    for (const auto& e : entries_) m(e.row, e.col) = 1.0;
    return m;
}

std::size_t ObservationMask::count_in_columns(const std::vector<Eigen::Index>& columns) const {
    return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(), [&](const Entry& e) {
        return std::binary_search(columns.begin(), columns.end(), e.col);
    }));
}

ObservationMask mask_union(const ObservationMask& a, const ObservationMask& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("mask_union: dimension mismatch");
    }
    std::vector<Entry> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.entries().begin(), a.entries().end(), b.entries().begin(), b.entries().end(),
                   std::back_inserter(out));
    return {a.rows(), a.cols(), std::move(out)};
}

void write_mask(std::ostream& out, const ObservationMask& mask) {
    out << mask.rows() << ' ' << mask.cols() << ' ' << mask.size() << '\n';
    for (const auto& e : mask.entries()) out << e.row << ' ' << e.col << '\n';
}

ObservationMask read_mask(std::istream& in) {
    long p = -1, n = -1, m = -1;
    if (!(in >> p >> n >> m) || p < 0 || n < 0 || m < 0) {
        throw std::runtime_error("read_mask: bad header");
    }
    std::vector<Entry> entries(static_cast<std::size_t>(m));
    for (auto& e : entries) {
        if (!(in >> e.row >> e.col)) throw std::runtime_error("read_mask: truncated data");
    }
    return {p, n, std::move(entries)};
}

// ---------------------------------------------------------------------------
// ColumnSet

ColumnSet::ColumnSet(Eigen::Index n, std::vector<Eigen::Index> members)
    : n_(n), members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
        throw std::invalid_argument("ColumnSet: duplicate column");
    }
    if (!members_.empty() && (members_.front() < 0 || members_.back() >= n)) {
        throw std::invalid_argument("ColumnSet: column index out of range");
    }
}

ColumnSet ColumnSet::all(Eigen::Index n) {
    std::vector<Eigen::Index> m(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) m[static_cast<std::size_t>(j)] = j;
    return {n, std::move(m)};
}

bool ColumnSet::contains(Eigen::Index j) const {
    return std::binary_search(members_.begin(), members_.end(), j);
}

ColumnSet ColumnSet::complement() const {
    std::vector<Eigen::Index> rest;
    rest.reserve(static_cast<std::size_t>(n_) - members_.size());
    for (Eigen::Index j = 0; j < n_; ++j)
        if (!contains(j)) rest.push_back(j);
    return {n_, std::move(rest)};
}

std::string format_columns(const ColumnSet& set) {
    std::string s;
    for (std::size_t k = 0; k < set.members().size(); ++k) {
        if (k) s += ',';
        s += std::to_string(set.members()[k]);
    }
    return s;
}

ColumnSet parse_columns(Eigen::Index n, const std::string& text) {
    std::vector<Eigen::Index> members;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        members.push_back(std::stol(item));
    }
    return {n, std::move(members)};
}

// ---------------------------------------------------------------------------
// TangentSpace

double orthonormality_error(const Matrix& basis) {
    if (basis.cols() == 0) return 0.0;
    const Matrix gram = basis.transpose() * basis;
    return (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

TangentSpace::TangentSpace(Matrix u, Matrix v) : u_(std::move(u)), v_(std::move(v)) {
    if (u_.cols() != v_.cols()) {
        throw std::invalid_argument("TangentSpace: U and V must have the same number of columns");
    }
    if (u_.cols() > std::min(u_.rows(), v_.rows())) {
        throw std::invalid_argument("TangentSpace: rank exceeds min(p, n)");
    }
    if (orthonormality_error(u_) > 1e-10 || orthonormality_error(v_) > 1e-10) {
        throw std::invalid_argument("TangentSpace: basis is not orthonormal");
    }
}

TangentSpace TangentSpace::from_matrix(const Matrix& a, double rel_threshold) {
    const SvdFactors f = svd(a);
    const Eigen::Index r = f.numerical_rank(rel_threshold);
    return {f.U.leftCols(r), f.V.leftCols(r)};
}

// ---------------------------------------------------------------------------
// Projections

Matrix project_mask(const Matrix& a, const ObservationMask& mask) {
    require_mask_shape(a, mask, "project_mask");
    Matrix out = Matrix::Zero(a.rows(), a.cols());
    for (const auto& e : mask.entries()) out(e.row, e.col) = a(e.row, e.col);
    return out;
}

Matrix project_mask_complement(const Matrix& a, const ObservationMask& mask) {
    require_mask_shape(a, mask, "project_mask_complement");
    Matrix out = a;
    for (const auto& e : mask.entries()) out(e.row, e.col) = 0.0;
    return out;
}

Matrix project_columns(const Matrix& a, const ColumnSet& set, bool complement) {
    require_set_shape(a, set, "project_columns");
    Matrix out = complement ? a : Matrix::Zero(a.rows(), a.cols());
    for (Eigen::Index j : set.members()) {
        if (complement)
            out.col(j).setZero();
        else
            out.col(j) = a.col(j);
    }
    return out;
}

Matrix restrict_columns(const Matrix& a, const ColumnSet& set, double tol) {
    require_set_shape(a, set, "restrict_columns");
    for (Eigen::Index j : set.members()) {
        if (a.rows() > 0 && a.col(j).cwiseAbs().maxCoeff() > tol) {
            throw std::invalid_argument("restrict_columns: column " + std::to_string(j) +
                                        " is not zero");
        }
    }
    const ColumnSet keep = set.complement();
    Matrix out(a.rows(), static_cast<Eigen::Index>(keep.size()));
    Eigen::Index k = 0;
    for (Eigen::Index j : keep.members()) out.col(k++) = a.col(j);
    return out;
}

Matrix embed_columns(const Matrix& b, const ColumnSet& set, Eigen::Index n) {
    if (set.n() != n) throw std::invalid_argument("embed_columns: column set size mismatch");
    const ColumnSet keep = set.complement();
    if (b.cols() != static_cast<Eigen::Index>(keep.size())) {
        throw std::invalid_argument("embed_columns: expected " + std::to_string(keep.size()) +
                                    " columns, got " + std::to_string(b.cols()));
    }
    Matrix out = Matrix::Zero(b.rows(), n);
    Eigen::Index k = 0;
    for (Eigen::Index j : keep.members()) out.col(j) = b.col(k++);
    return out;
}

Matrix project_tangent(const Matrix& a, const TangentSpace& t, bool complement) {
    if (a.rows() != t.rows() || a.cols() != t.cols()) {
        throw std::invalid_argument("project_tangent: dimension mismatch");
    }
    const Matrix& u = t.U();
    const Matrix& v = t.V();
    // (I - UU^T) A (I - VV^T)
    Matrix perp = a - u * (u.transpose() * a);
    perp -= (perp * v) * v.transpose();
    if (complement) return perp;
    return a - perp;
}

// ---------------------------------------------------------------------------
// Proximal operators

Matrix shrink_singular(const Matrix& a, double eps) {
    require_nonnegative(eps, "shrink_singular");
    if (eps == 0.0) return a;
    const SvdFactors f = svd(a);
    Eigen::Index k = 0;
    while (k < f.sigma.size() && f.sigma(k) > eps) ++k;
    if (k == 0) return Matrix::Zero(a.rows(), a.cols());
    const Vector s = f.sigma.head(k).array() - eps;
    return f.U.leftCols(k) * s.asDiagonal() * f.V.leftCols(k).transpose();
}

Matrix shrink_columns(const Matrix& a, double eps) {
    require_nonnegative(eps, "shrink_columns");
    Matrix out = Matrix::Zero(a.rows(), a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        const double nrm = a.col(j).norm();
        if (nrm > eps) out.col(j) = a.col(j) * (1.0 - eps / nrm);
    }
    return out;
}

Matrix shrink_entries(const Matrix& a, double eps) {
    require_nonnegative(eps, "shrink_entries");
    return a.unaryExpr([eps](double x) {
        if (x > eps) return x - eps;
        if (x < -eps) return x + eps;
        return 0.0;
    });
}

}  // namespace robustmc
