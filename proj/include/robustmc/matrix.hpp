#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace robustmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when the SVD routine fails to converge or produces non-finite factors.
class SvdError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thin singular value decomposition A = U diag(sigma) V^T with k = min(rows, cols).
struct SvdFactors {
    Matrix U;
    Vector sigma;
    Matrix V;

    Matrix reconstruct() const;
    /// Number of singular values above rel_threshold * sigma_1.
    Eigen::Index numerical_rank(double rel_threshold = 1e-9) const;
};

/// Relative threshold below which a singular value counts as zero.
inline constexpr double kRankThreshold = 1e-9;

SvdFactors svd(const Matrix& a);

enum class NormKind { nuclear, spectral, entry_inf, one_two, inf_two, frobenius };

double norm(const Matrix& a, NormKind kind);

inline double nuclear_norm(const Matrix& a) { return norm(a, NormKind::nuclear); }
inline double spectral_norm(const Matrix& a) { return norm(a, NormKind::spectral); }

NormKind parse_norm_kind(const std::string& name);

/// Frobenius inner product <A, B> = trace(A^T B).
double inner(const Matrix& a, const Matrix& b);

bool all_finite(const Matrix& a);
void require_finite(const Matrix& a, const char* what);
void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

/// Shortest decimal text that parses back to exactly v.
std::string format_double(double v);

// Text format: "rows cols" header then row-major values with 17 significant digits.
void write_matrix(std::ostream& out, const Matrix& a);
Matrix read_matrix(std::istream& in);
void save_matrix(const std::string& path, const Matrix& a);
Matrix load_matrix(const std::string& path);

}  // namespace robustmc
