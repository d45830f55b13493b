#include "sigreg/datagen.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sigreg/common.hpp"
#include "sigreg/rng.hpp"
#include "sigreg/signature.hpp"

namespace sigreg {

namespace {

// Substream tags. Distinct per purpose so adding draws to one generator never
// shifts another's stream.
constexpr std::uint64_t kAlphaTag = 0xa11a5;
constexpr std::uint64_t kBetaTag = 0xbe7a5;
constexpr std::uint64_t kNoiseTag = 0x0e155;
constexpr std::uint64_t kGpTag = 0x6a055;

void check_spec(const SimSpec& spec) {
    if (spec.n < 1) throw ConfigError("simulate: n must be >= 1");
    if (spec.d < 1) throw ConfigError("simulate: d must be >= 1");
    if (spec.p < 2) throw ConfigError("simulate: p must be >= 2");
}

double polysinus_value(const Eigen::Vector4d& a, double t) {
    const double phase = 2.0 * std::numbers::pi * t / a[2];
    const double shifted = t - a[3];
    return a[0] + 10.0 * a[1] * std::sin(phase) +
           10.0 * shifted * shifted * shifted;
}

}  // namespace

PolysinusData gen_polysinus(const SimSpec& spec) {
    check_spec(spec);
    const bool next_step = spec.response == SimResponse::mean_next_step;
    const auto n = static_cast<Eigen::Index>(spec.n);
    const int d = spec.d, p = spec.p;

    // Observed grid: j/p stopping short of 1 when the response looks one step
    // ahead, j/(p-1) covering [0, 1] otherwise.
    Eigen::VectorXd t(p);
    for (int j = 0; j < p; ++j)
        t[j] = next_step ? static_cast<double>(j) / p
                         : static_cast<double>(j) / (p - 1);

    PolysinusData data;
    data.paths.resize(spec.n);
    data.alphas.resize(n, 4 * d);
    data.next_values.resize(next_step ? n : 0, next_step ? d : 0);

    const std::uint64_t base = split_seed(spec.seed, kAlphaTag);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::MatrixXd values(p, d);
        for (int k = 0; k < d; ++k) {
            Rng rng(split_seed(base, static_cast<std::uint64_t>(i) * d + k));
            Eigen::Vector4d a;
            for (int j = 0; j < 4; ++j) a[j] = rng.uniform();
            data.alphas.row(i).segment(4 * k, 4) = a;
            for (int j = 0; j < p; ++j) values(j, k) = polysinus_value(a, t[j]);
            if (next_step) data.next_values(i, k) = polysinus_value(a, 1.0);
        }
        data.paths[i] = from_matrix(std::move(values), t);
    }
    return data;
}

SignatureResponse gen_signature_response(const std::vector<SampledPath>& paths,
                                         int m_star, std::uint64_t seed) {
    if (paths.empty()) throw DataError("signature response: no paths");
    const Eigen::MatrixXd S = batch_signatures(paths, m_star);

    SignatureResponse out;
    out.beta.resize(S.cols());
    Rng beta_rng(split_seed(seed, kBetaTag));
    for (Eigen::Index j = 0; j < S.cols(); ++j)
        out.beta[j] = beta_rng.uniform() / 1000.0;

    const auto n = static_cast<Eigen::Index>(paths.size());
    out.noise.resize(n);
    const std::uint64_t noise_base = split_seed(seed, kNoiseTag);
    for (Eigen::Index i = 0; i < n; ++i) {
        Rng rng(split_seed(noise_base, static_cast<std::uint64_t>(i)));
        out.noise[i] = rng.uniform(-100.0, 100.0);
    }
    out.targets = S * out.beta + out.noise;
    return out;
}

Eigen::VectorXd gen_mean_next_step(const PolysinusData& data) {
    if (data.next_values.rows() == 0)
        throw ConfigError("mean_next_step response needs data generated with "
                          "SimResponse::mean_next_step");
    return data.next_values.rowwise().mean();
}

GaussianProcessData gen_gaussian_process(const SimSpec& spec) {
    check_spec(spec);
    const auto n = static_cast<Eigen::Index>(spec.n);
    const int d = spec.d, p = spec.p;
    const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(p, 0.0, 1.0);

    Eigen::MatrixXd C(p, p);
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) C(a, b) = std::exp(-std::abs(t[a] - t[b]));
    Eigen::LLT<Eigen::MatrixXd> llt(C);
    for (double jitter = 1e-10; llt.info() != Eigen::Success; jitter *= 10.0) {
        if (jitter > 1e-6)
            throw ConditioningError("gaussian process covariance is not "
                                    "positive definite even with jitter");
        llt.compute(C + jitter * Eigen::MatrixXd::Identity(p, p));
    }
    const Eigen::MatrixXd L = llt.matrixL();

    GaussianProcessData data;
    data.paths.resize(spec.n);
    data.alphas.resize(n, d);
    data.targets.resize(n);

    const std::uint64_t base = split_seed(spec.seed, kGpTag);
    Eigen::VectorXd z(p);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::MatrixXd values(p, d);
        for (int k = 0; k < d; ++k) {
            Rng rng(split_seed(base, static_cast<std::uint64_t>(i) * d + k));
            data.alphas(i, k) = rng.uniform(-3.0, 3.0);
            for (int j = 0; j < p; ++j) z[j] = rng.normal();
            values.col(k) = data.alphas(i, k) * t + L * z;
        }
        data.paths[i] = from_matrix(std::move(values), t);
        data.targets[i] = data.alphas.row(i).norm();
    }
    return data;
}

Dataset generate(const SimSpec& spec) {
    check_spec(spec);
    switch (spec.model) {
        case SimModel::polysinus: {
            if (spec.response == SimResponse::trend_norm)
                throw ConfigError("trend_norm response requires the "
                                  "gaussian_process model");
            PolysinusData data = gen_polysinus(spec);
            if (spec.response == SimResponse::mean_next_step)
                return Dataset{std::move(data.paths), gen_mean_next_step(data)};
            if (spec.m_star < 0)
                throw ConfigError("signature response: m_star must be >= 0");
            SignatureResponse resp =
                gen_signature_response(data.paths, spec.m_star, spec.seed);
            return Dataset{std::move(data.paths), std::move(resp.targets)};
        }
        case SimModel::gaussian_process: {
            if (spec.response != SimResponse::trend_norm)
                throw ConfigError("gaussian_process model pairs with the "
                                  "trend_norm response");
            GaussianProcessData data = gen_gaussian_process(spec);
            return Dataset{std::move(data.paths), std::move(data.targets)};
        }
    }
    throw ConfigError("simulate: unknown model");
}

}  // namespace sigreg
