#pragma once

#include "robustmc/matrix.hpp"

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace robustmc {

struct Entry {
    Eigen::Index row;
    Eigen::Index col;
    auto operator<=>(const Entry&) const = default;
};

/// Set of observed positions in a rows x cols grid, kept strictly sorted
/// (row-major lexicographic) so equal sets compare equal.
class ObservationMask {
public:
    ObservationMask() = default;
    /// Sorts the entries; throws on out-of-range or duplicate pairs.
    ObservationMask(Eigen::Index rows, Eigen::Index cols, std::vector<Entry> entries);

    static ObservationMask full(Eigen::Index rows, Eigen::Index cols);
    static ObservationMask empty(Eigen::Index rows, Eigen::Index cols) { return {rows, cols, {}}; }
    /// Positions where indicator is nonzero.
    static ObservationMask from_indicator(const Matrix& indicator);

    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }
    std::size_t size() const { return entries_.size(); }
    bool is_empty() const { return entries_.empty(); }
    const std::vector<Entry>& entries() const { return entries_; }
    bool contains(Eigen::Index i, Eigen::Index j) const;

    /// 0/1 matrix with ones on observed positions.
    Matrix indicator() const;
    /// Number of entries whose column lies in `columns` (must be sorted).
    std::size_t count_in_columns(const std::vector<Eigen::Index>& columns) const;

    bool operator==(const ObservationMask&) const = default;

private:
    Eigen::Index rows_ = 0;
    Eigen::Index cols_ = 0;
    std::vector<Entry> entries_;
};

ObservationMask mask_union(const ObservationMask& a, const ObservationMask& b);

/// Header "p n m" followed by m lines "i j" in canonical order.
void write_mask(std::ostream& out, const ObservationMask& mask);
ObservationMask read_mask(std::istream& in);

/// Sorted set of column indices in [0, n).
class ColumnSet {
public:
    ColumnSet() = default;
    ColumnSet(Eigen::Index n, std::vector<Eigen::Index> members);

    static ColumnSet none(Eigen::Index n) { return {n, {}}; }
    static ColumnSet all(Eigen::Index n);

    Eigen::Index n() const { return n_; }
    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    const std::vector<Eigen::Index>& members() const { return members_; }
    bool contains(Eigen::Index j) const;
    ColumnSet complement() const;

    bool operator==(const ColumnSet&) const = default;

private:
    Eigen::Index n_ = 0;
    std::vector<Eigen::Index> members_;
};

std::string format_columns(const ColumnSet& set);
ColumnSet parse_columns(Eigen::Index n, const std::string& text);

/// Tangent space of matrices U X^T + Y V^T for orthonormal U (p x r), V (n x r).
class TangentSpace {
public:
    TangentSpace() = default;
    /// Throws unless U^T U = I and V^T V = I to 1e-10 entrywise.
    TangentSpace(Matrix u, Matrix v);

    /// Rank-r factors of `a`, with r its numerical rank at rel_threshold * sigma_1.
    static TangentSpace from_matrix(const Matrix& a, double rel_threshold = kRankThreshold);

    const Matrix& U() const { return u_; }
    const Matrix& V() const { return v_; }
    Eigen::Index rank() const { return u_.cols(); }
    Eigen::Index rows() const { return u_.rows(); }
    Eigen::Index cols() const { return v_.rows(); }
    /// Dimension r (p + n - r) of the space.
    Eigen::Index dimension() const { return rank() * (rows() + cols() - rank()); }

private:
    Matrix u_;
    Matrix v_;
};

/// Largest entrywise deviation of B^T B from the identity.
double orthonormality_error(const Matrix& basis);

Matrix project_mask(const Matrix& a, const ObservationMask& mask);
/// Zeroes the observed positions, keeping the complement.
Matrix project_mask_complement(const Matrix& a, const ObservationMask& mask);

/// Keeps the columns in `set` (or its complement) and zeroes the rest.
Matrix project_columns(const Matrix& a, const ColumnSet& set, bool complement = false);

/// Drops the columns in `set`; they must be zero to within `tol`.
Matrix restrict_columns(const Matrix& a, const ColumnSet& set, double tol = 1e-12);
/// Inverse of restrict_columns: reinserts zero columns at the positions in `set`.
Matrix embed_columns(const Matrix& b, const ColumnSet& set, Eigen::Index n);

Matrix project_tangent(const Matrix& a, const TangentSpace& t, bool complement = false);

/// Proximal operator of eps * nuclear norm (singular value soft-threshold).
Matrix shrink_singular(const Matrix& a, double eps);
/// Proximal operator of eps * (sum of column l2 norms).
Matrix shrink_columns(const Matrix& a, double eps);
/// Proximal operator of eps * (sum of absolute entries).
Matrix shrink_entries(const Matrix& a, double eps);

}  // namespace robustmc
