#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "inpl/rng.hpp"

namespace inpl {

enum class LongTailMode { DualExponential, Complement };

/// Long-tail split parameters. Labeled counts follow
/// N_k = N1 * gamma^(-(k-1)/(K-1)); unlabeled counts either follow the
/// same decay from M1 (dual) or satisfy M_k = D - N_k (complement).
struct LongTailSpec {
    int num_classes = 10;     // K
    double gamma = 100.0;     // imbalance ratio, >= 1
    long n1 = 1500;           // labeled count for the most frequent class
    LongTailMode mode = LongTailMode::DualExponential;
    long m1 = 3000;           // dual mode: unlabeled count of class 1
    long total_per_class = 0; // complement mode: D

    void validate() const {
        if (num_classes < 2) throw std::invalid_argument("longtail: K >= 2 required");
        if (!(gamma >= 1.0)) throw std::invalid_argument("longtail: gamma >= 1 required");
        if (n1 < 1) throw std::invalid_argument("longtail: N1 >= 1 required");
        if (mode == LongTailMode::DualExponential && m1 < 1)
            throw std::invalid_argument("longtail: M1 >= 1 required");
    }
};

struct LongTailCounts {
    std::vector<long> labeled;    // N_1..N_K
    std::vector<long> unlabeled;  // M_1..M_K
};

/// Rounding rule: round to nearest, clamp to a minimum of 1.
inline long longtail_round(double x) { return std::max(1L, std::lround(x)); }

inline LongTailCounts longtail_counts(const LongTailSpec& spec) {
    spec.validate();
    LongTailCounts c;
    int k_total = spec.num_classes;
    for (int k = 1; k <= k_total; ++k) {
        double decay = std::pow(spec.gamma, -(static_cast<double>(k - 1)) /
                                                static_cast<double>(k_total - 1));
        long nk = longtail_round(static_cast<double>(spec.n1) * decay);
        c.labeled.push_back(nk);
        if (spec.mode == LongTailMode::DualExponential) {
            c.unlabeled.push_back(longtail_round(static_cast<double>(spec.m1) * decay));
        } else {
            long mk = spec.total_per_class - nk;
            if (mk < 1)
                throw std::invalid_argument("longtail: complement mode needs D > N_k for class " +
                                            std::to_string(k));
            c.unlabeled.push_back(mk);
        }
    }
    return c;
}

/// Gaussian mixture geometry: one isotropic component per class, plus an
/// optional set of out-of-distribution components.
struct MixtureSpec {
    std::size_t dim = 2;
    std::vector<std::vector<double>> means;  // K rows of length dim
    std::vector<double> scales;              // per-class stddev
    std::vector<std::vector<double>> ood_means;
    double ood_scale = 1.0;

    void validate() const {
        if (dim < 2) throw std::invalid_argument("mixture: dim >= 2 required");
        if (means.empty()) throw std::invalid_argument("mixture: no class means");
        if (scales.size() != means.size()) throw std::invalid_argument("mixture: scale count mismatch");
        for (const auto& m : means)
            if (m.size() != dim) throw std::invalid_argument("mixture: mean dim mismatch");
        for (double s : scales)
            if (!(s > 0.0)) throw std::invalid_argument("mixture: scales must be positive");
        for (const auto& m : ood_means)
            if (m.size() != dim) throw std::invalid_argument("mixture: ood mean dim mismatch");
        if (!(ood_scale > 0.0)) throw std::invalid_argument("mixture: ood scale must be positive");
    }

    /// Class means equally spaced on a circle (d = 2) or on scaled basis
    /// vectors (d > 2, K <= d); falls back to the circle embedded in the
    /// first two coordinates otherwise.
    static MixtureSpec default_geometry(int num_classes, std::size_t dim, double radius,
                                        double scale) {
        MixtureSpec mix;
        mix.dim = dim;
        for (int k = 0; k < num_classes; ++k) {
            std::vector<double> mean(dim, 0.0);
            if (dim > 2 && static_cast<std::size_t>(num_classes) <= dim) {
                mean[static_cast<std::size_t>(k)] = radius;
            } else {
                double angle = 2.0 * 3.14159265358979323846 * k / num_classes;
                mean[0] = radius * std::cos(angle);
                mean[1] = radius * std::sin(angle);
            }
            mix.means.push_back(std::move(mean));
            mix.scales.push_back(scale);
        }
        return mix;
    }
};

struct AugmentConfig {
    double weak_noise = 0.1;   // sigma_w
    double strong_noise = 0.5; // sigma_s
    double mask_rate = 0.25;   // rho, strong only
    double mask_fill = 0.0;

    void validate() const {
        if (!(mask_rate >= 0.0 && mask_rate <= 1.0))
            throw std::invalid_argument("augment: mask rate must be in [0,1]");
        if (weak_noise < 0.0 || strong_noise < 0.0)
            throw std::invalid_argument("augment: noise scales must be nonnegative");
        if (weak_noise > strong_noise)
            throw std::invalid_argument("augment: weak noise must not exceed strong noise");
    }
};

enum class AugmentKind { Weak, Strong };

inline std::vector<double> augment(const std::vector<double>& x, AugmentKind kind,
                                   const AugmentConfig& cfg, Rng& rng) {
    cfg.validate();
    std::vector<double> out = x;
    double sigma = kind == AugmentKind::Weak ? cfg.weak_noise : cfg.strong_noise;
    for (double& v : out) v += sigma * rng.gaussian();
    if (kind == AugmentKind::Strong)
        for (double& v : out)
            if (rng.uniform() < cfg.mask_rate) v = cfg.mask_fill;
    return out;
}

constexpr int kOodLabel = -1;

/// Labeled/unlabeled/test splits. Ground-truth labels of unlabeled samples
/// (and OOD flags) are kept behind diagnostics() so the training path
/// cannot read them by accident.
class SSLDataset {
public:
    int num_classes = 0;
    std::size_t dim = 0;
    std::uint64_t seed = 0;
    LongTailSpec spec;

    std::vector<std::vector<double>> labeled_x;
    std::vector<int> labeled_y;
    std::vector<std::vector<double>> unlabeled_x;
    std::vector<std::vector<double>> test_x;
    std::vector<int> test_y;

    /// Hidden per-sample truth for the unlabeled pool: class index, or
    /// kOodLabel for injected outliers. Metrics only.
    const std::vector<int>& diagnostics() const { return unlabeled_truth_; }
    void set_hidden_truth(std::vector<int> truth) { unlabeled_truth_ = std::move(truth); }
    void push_hidden_truth(int v) { unlabeled_truth_.push_back(v); }

private:
    std::vector<int> unlabeled_truth_;
};

inline std::vector<double> draw_gaussian_point(const std::vector<double>& mean, double scale,
                                               Rng& rng) {
    std::vector<double> x(mean.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = mean[i] + scale * rng.gaussian();
    return x;
}

inline SSLDataset make_dataset(const LongTailSpec& lt, const MixtureSpec& mix,
                               long test_per_class, std::uint64_t seed) {
    lt.validate();
    mix.validate();
    if (mix.means.size() != static_cast<std::size_t>(lt.num_classes))
        throw std::invalid_argument("make_dataset: mixture class count mismatch");
    if (test_per_class < 1) throw std::invalid_argument("make_dataset: test_per_class >= 1");

    LongTailCounts counts = longtail_counts(lt);
    SSLDataset ds;
    ds.num_classes = lt.num_classes;
    ds.dim = mix.dim;
    ds.seed = seed;
    ds.spec = lt;

    Rng rng(seed);
    std::vector<int> truth;
    for (int k = 0; k < lt.num_classes; ++k) {
        for (long i = 0; i < counts.labeled[k]; ++i) {
            ds.labeled_x.push_back(draw_gaussian_point(mix.means[k], mix.scales[k], rng));
            ds.labeled_y.push_back(k);
        }
        for (long i = 0; i < counts.unlabeled[k]; ++i) {
            ds.unlabeled_x.push_back(draw_gaussian_point(mix.means[k], mix.scales[k], rng));
            truth.push_back(k);
        }
        for (long i = 0; i < test_per_class; ++i) {
            ds.test_x.push_back(draw_gaussian_point(mix.means[k], mix.scales[k], rng));
            ds.test_y.push_back(k);
        }
    }
    ds.set_hidden_truth(std::move(truth));
    return ds;
}

/// Appends round(fraction * |unlabeled|) samples drawn from the OOD
/// components, flagged with kOodLabel. Existing samples are untouched.
inline SSLDataset inject_ood(SSLDataset ds, double fraction, const MixtureSpec& mix,
                             std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0))
        throw std::invalid_argument("inject_ood: fraction must be in [0,1]");
    if (fraction == 0.0) return ds;
    if (mix.ood_means.empty()) throw std::invalid_argument("inject_ood: no OOD components");
    long n = std::lround(fraction * static_cast<double>(ds.unlabeled_x.size()));
    Rng rng(seed);
    for (long i = 0; i < n; ++i) {
        std::size_t comp = static_cast<std::size_t>(rng.uniform_index(mix.ood_means.size()));
        ds.unlabeled_x.push_back(draw_gaussian_point(mix.ood_means[comp], mix.ood_scale, rng));
        ds.push_hidden_truth(kOodLabel);
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Dataset file format (version 1, little-endian):
//   magic "INPLDS1\0"                        8 bytes
//   u32 K, u64 dim, u64 seed
//   longtail spec: u32 mode, f64 gamma, i64 n1, i64 m1, i64 total_per_class
//   u64 n_labeled, n_unlabeled, n_test
//   labeled:   n_labeled   * (dim f64 + i32 label)
//   unlabeled: n_unlabeled * (dim f64 + i32 hidden truth, -1 = OOD)
//   test:      n_test      * (dim f64 + i32 label)
// ---------------------------------------------------------------------------

namespace detail {

template <class T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("dataset file: truncated");
    return v;
}

}  // namespace detail

inline void save_dataset(const SSLDataset& ds, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open dataset file for writing: " + path);
    os.write("INPLDS1\0", 8);
    detail::write_pod(os, static_cast<std::uint32_t>(ds.num_classes));
    detail::write_pod(os, static_cast<std::uint64_t>(ds.dim));
    detail::write_pod(os, ds.seed);
    detail::write_pod(os, static_cast<std::uint32_t>(ds.spec.mode));
    detail::write_pod(os, ds.spec.gamma);
    detail::write_pod(os, static_cast<std::int64_t>(ds.spec.n1));
    detail::write_pod(os, static_cast<std::int64_t>(ds.spec.m1));
    detail::write_pod(os, static_cast<std::int64_t>(ds.spec.total_per_class));
    detail::write_pod(os, static_cast<std::uint64_t>(ds.labeled_x.size()));
    detail::write_pod(os, static_cast<std::uint64_t>(ds.unlabeled_x.size()));
    detail::write_pod(os, static_cast<std::uint64_t>(ds.test_x.size()));
    auto write_row = [&](const std::vector<double>& x, int label) {
        os.write(reinterpret_cast<const char*>(x.data()),
                 static_cast<std::streamsize>(x.size() * sizeof(double)));
        detail::write_pod(os, static_cast<std::int32_t>(label));
    };
    for (std::size_t i = 0; i < ds.labeled_x.size(); ++i) write_row(ds.labeled_x[i], ds.labeled_y[i]);
    for (std::size_t i = 0; i < ds.unlabeled_x.size(); ++i)
        write_row(ds.unlabeled_x[i], ds.diagnostics()[i]);
    for (std::size_t i = 0; i < ds.test_x.size(); ++i) write_row(ds.test_x[i], ds.test_y[i]);
    if (!os) throw std::runtime_error("dataset file: write failed: " + path);
}

inline SSLDataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open dataset file: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, "INPLDS1\0", 8) != 0)
        throw std::runtime_error("dataset file: bad magic/version: " + path);
    SSLDataset ds;
    ds.num_classes = static_cast<int>(detail::read_pod<std::uint32_t>(is));
    ds.dim = static_cast<std::size_t>(detail::read_pod<std::uint64_t>(is));
    ds.seed = detail::read_pod<std::uint64_t>(is);
    ds.spec.num_classes = ds.num_classes;
    ds.spec.mode = static_cast<LongTailMode>(detail::read_pod<std::uint32_t>(is));
    ds.spec.gamma = detail::read_pod<double>(is);
    ds.spec.n1 = static_cast<long>(detail::read_pod<std::int64_t>(is));
    ds.spec.m1 = static_cast<long>(detail::read_pod<std::int64_t>(is));
    ds.spec.total_per_class = static_cast<long>(detail::read_pod<std::int64_t>(is));
    std::uint64_t n_lab = detail::read_pod<std::uint64_t>(is);
    std::uint64_t n_unl = detail::read_pod<std::uint64_t>(is);
    std::uint64_t n_test = detail::read_pod<std::uint64_t>(is);
    auto read_row = [&](std::vector<double>& x, int& label) {
        x.resize(ds.dim);
        is.read(reinterpret_cast<char*>(x.data()),
                static_cast<std::streamsize>(ds.dim * sizeof(double)));
        label = static_cast<int>(detail::read_pod<std::int32_t>(is));
        if (!is) throw std::runtime_error("dataset file: truncated");
    };
    std::vector<int> truth;
    for (std::uint64_t i = 0; i < n_lab; ++i) {
        std::vector<double> x;
        int y;
        read_row(x, y);
        ds.labeled_x.push_back(std::move(x));
        ds.labeled_y.push_back(y);
    }
    for (std::uint64_t i = 0; i < n_unl; ++i) {
        std::vector<double> x;
        int y;
        read_row(x, y);
        ds.unlabeled_x.push_back(std::move(x));
        truth.push_back(y);
    }
    for (std::uint64_t i = 0; i < n_test; ++i) {
        std::vector<double> x;
        int y;
        read_row(x, y);
        ds.test_x.push_back(std::move(x));
        ds.test_y.push_back(y);
    }
    ds.set_hidden_truth(std::move(truth));
    return ds;
}

}  // namespace inpl
