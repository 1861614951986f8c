#ifndef SCGAN_METRICS_HPP
#define SCGAN_METRICS_HPP

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "scgan/common.hpp"
#include "scgan/dataset.hpp"
#include "scgan/features.hpp"
#include "scgan/rng.hpp"

namespace scgan {

// ---------------------------------------------------------------------------
// Distribution metrics over extracted features.
//
// Fréchet distance uses the symmetric form
//   tr(S1) + tr(S2) - 2 tr((S1^{1/2} S2 S1^{1/2})^{1/2}) + |m1-m2|^2
// with matrix square roots from symmetric eigendecompositions, eigenvalues
// clamped at zero, and a one-shot 1e-6 diagonal jitter retry if the
// decomposition fails. KID is the unbiased MMD^2 with the polynomial kernel
// (x.y/d + 1)^3, averaged over seeded subsets.
// ---------------------------------------------------------------------------

struct DistributionStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov; // denominator n-1
    std::size_t n = 0;
};

inline DistributionStats compute_stats(
    const std::vector<std::vector<double>>& features) {
    const std::size_t n = features.size();
    SCGAN_CHECK(n >= 2, ArgumentError,
                "need at least 2 samples for distribution stats, got ", n);
    const std::size_t d = features.front().size();
    Eigen::MatrixXd x(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        SCGAN_CHECK(features[i].size() == d, DimensionError,
                    "inconsistent feature dimension");
        for (std::size_t j = 0; j < d; ++j) x(long(i), long(j)) = features[i][j];
    }
    DistributionStats stats;
    stats.n = n;
    stats.mean = x.colwise().mean();
    Eigen::MatrixXd centered = x.rowwise() - stats.mean.transpose();
    stats.cov = (centered.transpose() * centered) / double(n - 1);
    stats.cov = ((stats.cov + stats.cov.transpose()) / 2.0).eval();
    return stats;
}

namespace metric_detail {

// Symmetric psd square root; negative eigenvalues (rounding) clamp to 0.
// Returns false if the eigensolver fails.
inline bool sym_sqrt(const Eigen::MatrixXd& m, Eigen::MatrixXd& out) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) return false;
    Eigen::VectorXd lam = es.eigenvalues();
    for (long i = 0; i < lam.size(); ++i) lam[i] = lam[i] > 0 ? std::sqrt(lam[i]) : 0.0;
    out = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
    return true;
}

inline Eigen::MatrixXd sym_sqrt_with_jitter(Eigen::MatrixXd m) {
    Eigen::MatrixXd root;
    if (sym_sqrt(m, root)) return root;
    m.diagonal().array() += 1e-6;
    SCGAN_CHECK(sym_sqrt(m, root), NumericError,
                "matrix square root failed even with diagonal jitter");
    return root;
}

inline void check_symmetric(const Eigen::MatrixXd& m, const char* what) {
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    SCGAN_CHECK(asym <= 1e-8, ArgumentError, what,
                " covariance is not symmetric (max asymmetry ", asym, ")");
}

} // namespace metric_detail

inline double frechet_distance(const DistributionStats& a,
                               const DistributionStats& b) {
    SCGAN_CHECK(a.mean.size() == b.mean.size() && a.cov.rows() == b.cov.rows(),
                ArgumentError, "dimension mismatch: ", a.mean.size(), " vs ",
                b.mean.size());
    metric_detail::check_symmetric(a.cov, "first");
    metric_detail::check_symmetric(b.cov, "second");
    Eigen::MatrixXd root_a = metric_detail::sym_sqrt_with_jitter(a.cov);
    Eigen::MatrixXd inner = root_a * b.cov * root_a;
    inner = ((inner + inner.transpose()) / 2.0).eval();
    Eigen::MatrixXd cross = metric_detail::sym_sqrt_with_jitter(inner);
    const double mean_term = (a.mean - b.mean).squaredNorm();
    double fid =
        a.cov.trace() + b.cov.trace() - 2.0 * cross.trace() + mean_term;
    return fid < 0 ? 0.0 : fid;
}

// Unbiased MMD^2 with kernel (x.y/d + 1)^3 on one pair of subsets.
inline double kid_mmd2(const std::vector<std::vector<double>>& real,
                       const std::vector<std::size_t>& idx_r,
                       const std::vector<std::vector<double>>& fake,
                       const std::vector<std::size_t>& idx_f) {
    const std::size_t s = idx_r.size();
    const double d = double(real.front().size());
    auto kernel = [d](const std::vector<double>& x,
                      const std::vector<double>& y) {
        double dot = 0;
        for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
        const double base = dot / d + 1.0;
        return base * base * base;
    };
    double within_r = 0, within_f = 0, cross = 0;
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j) {
            if (i != j) {
                within_r += kernel(real[idx_r[i]], real[idx_r[j]]);
                within_f += kernel(fake[idx_f[i]], fake[idx_f[j]]);
            }
            cross += kernel(real[idx_r[i]], fake[idx_f[j]]);
        }
    const double pairs = double(s) * double(s - 1);
    return within_r / pairs + within_f / pairs -
           2.0 * cross / (double(s) * double(s));
}

struct KidResult {
    double mean = 0, std = 0;
    std::size_t subset_size = 0, n_subsets = 0;
};

inline KidResult kid(const std::vector<std::vector<double>>& real,
                     const std::vector<std::vector<double>>& fake,
                     std::size_t subset_size = 100, std::size_t n_subsets = 10,
                     std::uint64_t seed = 0) {
    SCGAN_CHECK(real.size() >= 2 && fake.size() >= 2, ArgumentError,
                "KID needs at least 2 samples per side, got ", real.size(),
                " and ", fake.size());
    SCGAN_CHECK(n_subsets >= 1, ArgumentError, "need at least one subset");
    KidResult result;
    result.subset_size =
        std::min(subset_size, std::min(real.size(), fake.size()));
    result.n_subsets = n_subsets;
    SCGAN_CHECK(result.subset_size >= 2, ArgumentError,
                "subset size must be at least 2");
    std::vector<double> estimates(n_subsets);
    for (std::size_t k = 0; k < n_subsets; ++k) {
        Rng rng_r = Rng::stream(seed, "kid.real", k);
        Rng rng_f = Rng::stream(seed, "kid.fake", k);
        std::vector<std::size_t> perm_r, perm_f;
        rng_r.permutation(real.size(), perm_r);
        rng_f.permutation(fake.size(), perm_f);
        perm_r.resize(result.subset_size);
        perm_f.resize(result.subset_size);
        estimates[k] = kid_mmd2(real, perm_r, fake, perm_f);
    }
    double sum = 0;
    for (double e : estimates) sum += e;
    result.mean = sum / double(n_subsets);
    double var = 0;
    for (double e : estimates) var += (e - result.mean) * (e - result.mean);
    result.std = std::sqrt(var / double(n_subsets));
    return result;
}

struct MetricReport {
    double fid = 0;
    double kid_mean = 0, kid_std = 0;
    std::size_t n_real = 0, n_fake = 0;
    std::string extractor;
    std::uint64_t extractor_seed = 0;
    std::size_t subset_size = 0, n_subsets = 0;

    nlohmann::json to_json() const {
        return {{"fid", fid},
                {"kid_mean", kid_mean},
                {"kid_std", kid_std},
                {"kid_x100", kid_mean * 100.0},
                {"kid_x100_convention", true},
                {"n_real", n_real},
                {"n_fake", n_fake},
                {"extractor", extractor},
                {"extractor_seed", extractor_seed},
                {"subset_size", subset_size},
                {"n_subsets", n_subsets}};
    }
};

struct EvaluateOptions {
    std::size_t subset_size = 100;
    std::size_t n_subsets = 10;
    std::uint64_t kid_seed = 0;
};

inline MetricReport evaluate_features(
    const std::vector<std::vector<double>>& real_f,
    const std::vector<std::vector<double>>& fake_f,
    const FeatureExtractor& extractor, const EvaluateOptions& opts = {}) {
    MetricReport report;
    report.n_real = real_f.size();
    report.n_fake = fake_f.size();
    report.extractor = extractor_name(extractor.kind());
    report.extractor_seed = extractor.seed();
    report.fid = frechet_distance(compute_stats(real_f), compute_stats(fake_f));
    KidResult k = kid(real_f, fake_f, opts.subset_size, opts.n_subsets,
                      opts.kid_seed);
    report.kid_mean = k.mean;
    report.kid_std = k.std;
    report.subset_size = k.subset_size;
    report.n_subsets = k.n_subsets;
    return report;
}

inline MetricReport evaluate_dirs(const std::string& real_dir,
                                  const std::string& fake_dir,
                                  const FeatureExtractor& extractor,
                                  const EvaluateOptions& opts = {}) {
    DomainData<float> real = load_domain<float>(real_dir, 0);
    DomainData<float> fake = load_domain<float>(fake_dir, 0);
    SCGAN_CHECK(real.count() >= 2, IoError, "need at least 2 images in ",
                real_dir, ", found ", real.count());
    SCGAN_CHECK(fake.count() >= 2, IoError, "need at least 2 images in ",
                fake_dir, ", found ", fake.count());
    return evaluate_features(extractor.extract(real.images),
                             extractor.extract(fake.images), extractor, opts);
}

} // namespace scgan

#endif
