#include "sigreg/signature.hpp"

#include <omp.h>

#include <atomic>
#include <cstdint>
#include <limits>
#include <string>

#include "sigreg/common.hpp"

namespace sigreg {

namespace {

std::atomic<std::size_t> g_budget{10'000'000};

void check_dims(int d, int m) {
    if (d < 1) throw ConfigError("signature: path dimension must be >= 1");
    if (m < 0) throw ConfigError("signature: truncation order must be >= 0");
}

}  // namespace

std::size_t coefficient_budget() { return g_budget.load(); }

void set_coefficient_budget(std::size_t budget) {
    if (budget == 0) throw ConfigError("coefficient budget must be positive");
    g_budget.store(budget);
}

std::size_t sig_dim(int d, int m) {
    check_dims(d, m);
    const auto ud = static_cast<std::size_t>(d);
    constexpr auto kMax = std::numeric_limits<std::size_t>::max();
    std::size_t total = 0, power = 1;
    for (int k = 1; k <= m; ++k) {
        if (power > kMax / ud)
            throw CapacityError("sig_dim(" + std::to_string(d) + ", " +
                                std::to_string(m) + ") overflows");
        power *= ud;
        if (total > kMax - power)
            throw CapacityError("sig_dim(" + std::to_string(d) + ", " +
                                std::to_string(m) + ") overflows");
        total += power;
    }
    return total;
}

SigShape::SigShape(int d, int m) : d(d), m(m) {
    const std::size_t dim = sig_dim(d, m);  // throws on overflow
    if (dim >= coefficient_budget())
        throw CapacityError("signature shape d=" + std::to_string(d) +
                            " m=" + std::to_string(m) + " needs " +
                            std::to_string(dim) +
                            "+1 coefficients, over the budget of " +
                            std::to_string(coefficient_budget()));
    len = dim + 1;
    offsets_.resize(m + 2);
    offsets_[0] = 0;
    offsets_[1] = 1;
    std::size_t power = 1;
    for (int k = 1; k <= m; ++k) {
        power *= static_cast<std::size_t>(d);
        offsets_[k + 1] = offsets_[k] + power;
    }
}

std::size_t index_of(const SigShape& shape, std::span<const int> word) {
    const int k = static_cast<int>(word.size());
    if (k > shape.m)
        throw ConfigError("index_of: word length " + std::to_string(k) +
                          " exceeds truncation order " + std::to_string(shape.m));
    std::size_t within = 0;
    for (int letter : word) {
        if (letter < 1 || letter > shape.d)
            throw ConfigError("index_of: coordinate " + std::to_string(letter) +
                              " outside 1.." + std::to_string(shape.d));
        within = within * shape.d + static_cast<std::size_t>(letter - 1);
    }
    return shape.level_offset(k) + within;
}

namespace detail {

void chen_inplace(const SigShape& shape, double* acc, const double* other) {
    for (int level = shape.m; level >= 1; --level) {
        double* dst = acc + shape.level_offset(level);
        for (int la = level - 1; la >= 1; --la) {
            const int lb = level - la;
            const double* pa = acc + shape.level_offset(la);
            const double* pb = other + shape.level_offset(lb);
            const std::size_t na = shape.level_size(la);
            const std::size_t nb = shape.level_size(lb);
            for (std::size_t ia = 0; ia < na; ++ia) {
                const double a = pa[ia];
                double* row = dst + ia * nb;
                for (std::size_t ib = 0; ib < nb; ++ib) row[ib] += a * pb[ib];
            }
        }
        // order-0 of acc is 1, so the remaining cross term is just +other.
        const double* pb = other + shape.level_offset(level);
        const std::size_t nb = shape.level_size(level);
        for (std::size_t ib = 0; ib < nb; ++ib) dst[ib] += pb[ib];
    }
}

void segment_signature_into(const SigShape& shape, const double* displacement,
                            double* out) {
    out[0] = 1.0;
    const int d = shape.d;
    for (int k = 1; k <= shape.m; ++k) {
        const double* prev = out + shape.level_offset(k - 1);
        double* cur = out + shape.level_offset(k);
        const std::size_t np = shape.level_size(k - 1);
        const double inv = 1.0 / k;
        for (std::size_t i = 0; i < np; ++i) {
            const double base = prev[i] * inv;
            double* row = cur + i * static_cast<std::size_t>(d);
            for (int j = 0; j < d; ++j) row[j] = base * displacement[j];
        }
    }
}

void signature_into(const SampledPath& path, const SigShape& shape,
                    double* acc, std::vector<double>& seg_buffer) {
    seg_buffer.resize(shape.len);
    acc[0] = 1.0;
    std::fill(acc + 1, acc + shape.len, 0.0);
    const int d = shape.d;
    Eigen::VectorXd disp(d);
    for (Eigen::Index j = 0; j + 1 < path.p(); ++j) {
        disp = path.values.row(j + 1) - path.values.row(j);
        if ((disp.array() == 0.0).all()) continue;  // identity segment
        segment_signature_into(shape, disp.data(), seg_buffer.data());
        chen_inplace(shape, acc, seg_buffer.data());
    }
}

}  // namespace detail

TruncatedSignature linear_segment_signature(const Eigen::VectorXd& displacement,
                                            int m) {
    SigShape shape(static_cast<int>(displacement.size()), m);
    TruncatedSignature sig{shape, std::vector<double>(shape.len)};
    detail::segment_signature_into(shape, displacement.data(), sig.coeffs.data());
    return sig;
}

TruncatedSignature chen_concat(const TruncatedSignature& a,
                               const TruncatedSignature& b) {
    if (!(a.shape == b.shape))
        throw ConfigError("chen_concat: operand shapes differ");
    TruncatedSignature out{a.shape, a.coeffs};
    detail::chen_inplace(out.shape, out.coeffs.data(), b.coeffs.data());
    return out;
}

TruncatedSignature signature(const SampledPath& path, int m) {
    SigShape shape(static_cast<int>(path.d()), m);
    TruncatedSignature sig{shape, std::vector<double>(shape.len)};
    std::vector<double> seg;
    detail::signature_into(path, shape, sig.coeffs.data(), seg);
    return sig;
}

namespace {

SigShape batch_shape(const std::vector<SampledPath>& paths, int m) {
    if (paths.empty()) throw DataError("batch_signatures: empty path set");
    const int d = static_cast<int>(paths.front().d());
    for (const auto& p : paths)
        if (p.d() != d)
            throw DataError("batch_signatures: paths mix dimensions " +
                            std::to_string(d) + " and " + std::to_string(p.d()));
    return SigShape(d, m);
}

}  // namespace

Eigen::MatrixXd batch_signatures(const std::vector<SampledPath>& paths, int m) {
    const SigShape shape = batch_shape(paths, m);
    const auto n = static_cast<Eigen::Index>(paths.size());
    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(shape.len));
#pragma omp parallel
    {
        std::vector<double> acc(shape.len), seg;
#pragma omp for schedule(dynamic)
        for (Eigen::Index i = 0; i < n; ++i) {
            detail::signature_into(paths[i], shape, acc.data(), seg);
            out.row(i) = Eigen::Map<const Eigen::RowVectorXd>(
                acc.data(), static_cast<Eigen::Index>(shape.len));
        }
    }
    return out;
}

Eigen::MatrixXd batch_signatures_serial(const std::vector<SampledPath>& paths,
                                        int m) {
    const SigShape shape = batch_shape(paths, m);
    const auto n = static_cast<Eigen::Index>(paths.size());
    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(shape.len));
    for (Eigen::Index i = 0; i < n; ++i) {
        const SampledPath& path = paths[i];
        TruncatedSignature sig =
            linear_segment_signature(Eigen::VectorXd::Zero(shape.d), m);
        for (Eigen::Index j = 0; j + 1 < path.p(); ++j) {
            Eigen::VectorXd disp = path.values.row(j + 1) - path.values.row(j);
            sig = chen_concat(sig, linear_segment_signature(disp, m));
        }
        out.row(i) = Eigen::Map<const Eigen::RowVectorXd>(
            sig.coeffs.data(), static_cast<Eigen::Index>(shape.len));
    }
    return out;
}

}  // namespace sigreg
