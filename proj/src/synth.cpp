#include "robustmc/synth.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace robustmc {

std::string to_string(CorruptionKind kind) {
    switch (kind) {
        case CorruptionKind::single_adversarial: return "single_adversarial";
        case CorruptionKind::neutral_gaussian: return "neutral_gaussian";
        case CorruptionKind::adversarial_copy: return "adversarial_copy";
    }
    return "unknown";
}

CorruptionKind parse_corruption_kind(const std::string& name) {
    if (name == "single_adversarial") return CorruptionKind::single_adversarial;
    if (name == "neutral_gaussian") return CorruptionKind::neutral_gaussian;
    if (name == "adversarial_copy") return CorruptionKind::adversarial_copy;
    throw std::invalid_argument("unknown corruption scheme: " + name);
}

Matrix gen_low_rank(Eigen::Index p, Eigen::Index n1, Eigen::Index r, Rng& rng) {
    if (p < 1 || n1 < 1) throw std::invalid_argument("gen_low_rank: dimensions must be positive");
    if (r < 0 || r > std::min(p, n1)) throw std::invalid_argument("gen_low_rank: rank out of range");
    if (r == 0) return Matrix::Zero(p, n1);
    const Matrix a = rng.gaussian(p, r);
    const Matrix b = rng.gaussian(n1, r);
    return a * b.transpose();
}

ObservationMask sample_uniform_without_replacement(Eigen::Index p, Eigen::Index n1, std::size_t m,
                                                   Rng& rng) {
    const auto total = static_cast<std::size_t>(p * n1);
    if (p < 0 || n1 < 0 || m > total) {
        throw std::invalid_argument("sample_uniform_without_replacement: m out of range");
    }
    std::vector<std::size_t> cells(total);
    std::iota(cells.begin(), cells.end(), std::size_t{0});
    // Partial Fisher-Yates: the first m slots form a uniform m-subset.
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t pick = k + static_cast<std::size_t>(rng.below(total - k));
        std::swap(cells[k], cells[pick]);
    }
    std::vector<Entry> entries;
    entries.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
        const auto c = static_cast<Eigen::Index>(cells[k]);
        entries.push_back({c / n1, c % n1});
    }
    return {p, n1, std::move(entries)};
}

std::vector<ObservationMask> sample_batch_replacement(Eigen::Index p, Eigen::Index n1, std::size_t s,
                                                      std::size_t q, Rng& rng) {
    if (s < 1) throw std::invalid_argument("sample_batch_replacement: need at least one batch");
    if (q > static_cast<std::size_t>(p * n1)) {
        throw std::invalid_argument("sample_batch_replacement: q out of range");
    }
    std::vector<ObservationMask> batches;
    batches.reserve(s);
    for (std::size_t i = 0; i < s; ++i) batches.push_back(sample_uniform_without_replacement(p, n1, q, rng));
    return batches;
}

Eigen::Index corrupted_count(double gamma, Eigen::Index n) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
    return static_cast<Eigen::Index>(std::llround(gamma * static_cast<double>(n)));
}

Corruption apply_corruption(const Matrix& L0_clean, const ObservationMask& clean_mask,
                            const CorruptionScheme& scheme, double gamma, Eigen::Index n,
                            double rho, Rng& rng) {
    if (!std::isfinite(scheme.magnitude)) throw std::invalid_argument("corruption magnitude must be finite");
    const Eigen::Index k = corrupted_count(gamma, n);
    if (k < 1) throw std::invalid_argument("apply_corruption: round(gamma * n) must be at least 1");
    if (scheme.kind == CorruptionKind::single_adversarial && k != 1) {
        throw std::invalid_argument("apply_corruption: single_adversarial needs round(gamma * n) == 1");
    }
    const Eigen::Index p = L0_clean.rows();
    const Eigen::Index n1 = n - k;
    if (L0_clean.cols() != n1 || n1 < 1) {
        throw std::invalid_argument("apply_corruption: clean block must have n - round(gamma * n) columns");
    }
    if (clean_mask.rows() != p || clean_mask.cols() != n1) {
        throw std::invalid_argument("apply_corruption: clean mask dimension mismatch");
    }

    Matrix block = Matrix::Zero(p, k);
    std::vector<Entry> seen;
    switch (scheme.kind) {
        case CorruptionKind::single_adversarial:
            block.col(0) = L0_clean.col(0);
            block(p - 1, 0) = scheme.magnitude;
            for (Eigen::Index i = 0; i < p; ++i) seen.push_back({i, n1});
            break;
        case CorruptionKind::neutral_gaussian:
            for (Eigen::Index j = 0; j < k; ++j) {
                for (Eigen::Index i = 0; i < p; ++i) {
                    const double value = rng.normal();
                    if (rng.bernoulli(rho)) {
                        block(i, j) = value;
                        seen.push_back({i, n1 + j});
                    }
                }
            }
            break;
        case CorruptionKind::adversarial_copy:
            for (Eigen::Index j = 0; j < k; ++j) {
                const Eigen::Index src = j % n1;
                for (Eigen::Index i = 0; i < p; ++i) {
                    block(i, j) = clean_mask.contains(i, src) ? L0_clean(i, src) : rng.normal();
                    seen.push_back({i, n1 + j});
                }
            }
            break;
    }

    Corruption out;
    out.L0 = Matrix::Zero(p, n);
    out.L0.leftCols(n1) = L0_clean;
    out.C0 = Matrix::Zero(p, n);
    out.C0.rightCols(k) = block;
    std::vector<Eigen::Index> cols(static_cast<std::size_t>(k));
    std::iota(cols.begin(), cols.end(), n1);
    out.I0 = ColumnSet(n, std::move(cols));
    out.observed = ObservationMask(p, n, std::move(seen));
    return out;
}

namespace {

ObservationMask widen(const ObservationMask& mask, Eigen::Index n) {
    return {mask.rows(), n, mask.entries()};
}

}  // namespace

ProblemInstance build_instance(Eigen::Index p, Eigen::Index n, Eigen::Index r, double gamma, double rho,
                               const CorruptionScheme& scheme, std::uint64_t seed, bool permute_columns) {
    if (p < 1 || n < 1) throw std::invalid_argument("build_instance: dimensions must be positive");
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("build_instance: rho must lie in (0, 1]");
    const Eigen::Index k = corrupted_count(gamma, n);
    if (gamma > 0.0 && k == 0) {
        throw std::invalid_argument("build_instance: gamma > 0 but round(gamma * n) == 0");
    }
    const Eigen::Index n1 = n - k;
    if (n1 < 1) throw std::invalid_argument("build_instance: no clean columns left");
    if (r < 0 || r > std::min(p, n1)) throw std::invalid_argument("build_instance: rank out of range");

    ProblemInstance inst;
    inst.p = p;
    inst.n = n;
    inst.n1 = n1;
    inst.r = r;
    inst.gamma = gamma;
    inst.rho = rho;
    inst.scheme = scheme;
    inst.permuted = permute_columns;
    inst.seed = seed;

    Rng rng(seed);
    const Matrix clean = gen_low_rank(p, n1, r, rng);
    const auto m = static_cast<std::size_t>(std::llround(rho * static_cast<double>(p * n1)));
    const ObservationMask clean_mask = sample_uniform_without_replacement(p, n1, m, rng);

    if (k > 0) {
        Corruption c = apply_corruption(clean, clean_mask, scheme, gamma, n, rho, rng);
        inst.L0 = std::move(c.L0);
        inst.C0 = std::move(c.C0);
        inst.I0 = std::move(c.I0);
        inst.omega = mask_union(widen(clean_mask, n), c.observed);
    } else {
        inst.L0 = clean;
        inst.C0 = Matrix::Zero(p, n);
        inst.I0 = ColumnSet::none(n);
        inst.omega = clean_mask;
    }

    if (permute_columns) {
        std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), Eigen::Index{0});
        for (std::size_t j = perm.size(); j > 1; --j) {
            std::swap(perm[j - 1], perm[static_cast<std::size_t>(rng.below(j))]);
        }
        // Column j of the original lands at position perm[j].
        Matrix L(p, n), C(p, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            L.col(perm[static_cast<std::size_t>(j)]) = inst.L0.col(j);
            C.col(perm[static_cast<std::size_t>(j)]) = inst.C0.col(j);
        }
        std::vector<Entry> moved;
        moved.reserve(inst.omega.size());
        for (const auto& e : inst.omega.entries()) moved.push_back({e.row, perm[static_cast<std::size_t>(e.col)]});
        std::vector<Eigen::Index> bad;
        for (Eigen::Index j : inst.I0.members()) bad.push_back(perm[static_cast<std::size_t>(j)]);
        inst.L0 = std::move(L);
        inst.C0 = std::move(C);
        inst.omega = ObservationMask(p, n, std::move(moved));
        inst.I0 = ColumnSet(n, std::move(bad));
    }

    inst.M_obs = project_mask(inst.L0 + inst.C0, inst.omega);
    return inst;
}

void save_instance(const std::string& dir, const ProblemInstance& inst) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream out(fs::path(dir) / "manifest.txt");
        if (!out) throw std::runtime_error("cannot write manifest in " + dir);
        out << std::setprecision(std::numeric_limits<double>::max_digits10);
        out << "p=" << inst.p << '\n'
            << "n=" << inst.n << '\n'
            << "r=" << inst.r << '\n'
            << "gamma=" << inst.gamma << '\n'
            << "rho=" << inst.rho << '\n'
            << "scheme=" << to_string(inst.scheme.kind) << '\n'
            << "magnitude=" << inst.scheme.magnitude << '\n'
            << "seed=" << inst.seed << '\n'
            << "permuted=" << (inst.permuted ? 1 : 0) << '\n'
            << "corrupted=" << format_columns(inst.I0) << '\n';
    }
    save_matrix((fs::path(dir) / "L0.txt").string(), inst.L0);
    save_matrix((fs::path(dir) / "C0.txt").string(), inst.C0);
    save_matrix((fs::path(dir) / "M_obs.txt").string(), inst.M_obs);
    std::ofstream mask_out(fs::path(dir) / "omega.txt");
    write_mask(mask_out, inst.omega);
}

ProblemInstance load_instance(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream in(fs::path(dir) / "manifest.txt");
    if (!in) throw std::runtime_error("cannot read manifest in " + dir);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto get = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw std::runtime_error("manifest missing key " + key);
        return it->second;
    };
    ProblemInstance inst;
    inst.p = std::stol(get("p"));
    inst.n = std::stol(get("n"));
    inst.r = std::stol(get("r"));
    inst.gamma = std::stod(get("gamma"));
    inst.rho = std::stod(get("rho"));
    inst.scheme.kind = parse_corruption_kind(get("scheme"));
    inst.scheme.magnitude = std::stod(get("magnitude"));
    inst.seed = std::stoull(get("seed"));
    inst.permuted = get("permuted") == "1";
    inst.I0 = parse_columns(inst.n, get("corrupted"));
    inst.n1 = inst.n - static_cast<Eigen::Index>(inst.I0.size());
    inst.L0 = load_matrix((fs::path(dir) / "L0.txt").string());
    inst.C0 = load_matrix((fs::path(dir) / "C0.txt").string());
    inst.M_obs = load_matrix((fs::path(dir) / "M_obs.txt").string());
    std::ifstream mask_in(fs::path(dir) / "omega.txt");
    if (!mask_in) throw std::runtime_error("cannot read omega.txt in " + dir);
    inst.omega = read_mask(mask_in);
    return inst;
}

}  // namespace robustmc
