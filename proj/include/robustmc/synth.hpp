#pragma once

#include "robustmc/matrix.hpp"
#include "robustmc/operators.hpp"
#include "robustmc/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace robustmc {

enum class CorruptionKind {
    single_adversarial,  ///< one column: copy of clean column 0 with its last entry set to `magnitude`
    neutral_gaussian,    ///< i.i.d. standard Gaussian entries, each observed with probability rho
    adversarial_copy,    ///< column i copies the observed entries of clean column i, noise elsewhere
};

std::string to_string(CorruptionKind kind);
CorruptionKind parse_corruption_kind(const std::string& name);

struct CorruptionScheme {
    CorruptionKind kind = CorruptionKind::single_adversarial;
    double magnitude = 10.0;
};

struct ProblemInstance {
    Eigen::Index p = 0;
    Eigen::Index n = 0;
    Eigen::Index n1 = 0;
    Eigen::Index r = 0;
    double gamma = 0.0;
    double rho = 1.0;
    CorruptionScheme scheme;
    bool permuted = false;
    std::uint64_t seed = 0;

    Matrix L0;  ///< p x n, zero on I0
    Matrix C0;  ///< p x n, zero off I0 and off Omega
    ColumnSet I0;
    ObservationMask omega;
    Matrix M_obs;  ///< P_Omega(L0 + C0)
};

/// A B^T with A (p x r) and B (n1 x r) standard Gaussian.
Matrix gen_low_rank(Eigen::Index p, Eigen::Index n1, Eigen::Index r, Rng& rng);

/// m distinct positions of the p x n1 grid, every m-subset equally likely.
ObservationMask sample_uniform_without_replacement(Eigen::Index p, Eigen::Index n1, std::size_t m,
                                                   Rng& rng);

/// s independent batches, each q distinct positions drawn without replacement.
std::vector<ObservationMask> sample_batch_replacement(Eigen::Index p, Eigen::Index n1, std::size_t s,
                                                      std::size_t q, Rng& rng);

/// Number of corrupted columns round(gamma * n).
Eigen::Index corrupted_count(double gamma, Eigen::Index n);

struct Corruption {
    Matrix L0;  ///< clean matrix padded with zero columns on I0
    Matrix C0;
    ColumnSet I0;
    ObservationMask observed;  ///< observed positions on the corrupted columns (p x n)
};

/// Appends round(gamma * n) corrupted columns after the clean block. `clean_mask`
/// is the observation set of the clean block (p x n1), needed by adversarial_copy.
Corruption apply_corruption(const Matrix& L0_clean, const ObservationMask& clean_mask,
                            const CorruptionScheme& scheme, double gamma, Eigen::Index n,
                            double rho, Rng& rng);

/// Full generation pipeline. With permute_columns the corrupted columns are
/// scattered by a random permutation instead of occupying the trailing block.
ProblemInstance build_instance(Eigen::Index p, Eigen::Index n, Eigen::Index r, double gamma, double rho,
                               const CorruptionScheme& scheme, std::uint64_t seed,
                               bool permute_columns = false);

/// Directory layout: manifest.txt (key=value), L0.txt, C0.txt, M_obs.txt, omega.txt.
void save_instance(const std::string& dir, const ProblemInstance& inst);
ProblemInstance load_instance(const std::string& dir);

}  // namespace robustmc
