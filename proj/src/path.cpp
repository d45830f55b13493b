#include "sigreg/path.hpp"

#include <string>

#include "sigreg/common.hpp"

namespace sigreg {

SampledPath from_matrix(Eigen::MatrixXd values,
                        std::optional<Eigen::VectorXd> times) {
    const Eigen::Index p = values.rows();
    const Eigen::Index d = values.cols();
    if (p < 2)
        throw DataError("path needs at least 2 sample points, got " +
                        std::to_string(p));
    if (d < 1) throw DataError("path needs at least 1 coordinate");
    if (!values.allFinite())
        throw DataError("path values contain NaN or infinity");

    Eigen::VectorXd t;
    if (times) {
        t = std::move(*times);
        if (t.size() != p)
            throw DataError("time grid has " + std::to_string(t.size()) +
                            " entries for " + std::to_string(p) + " samples");
        if (!t.allFinite()) throw DataError("time grid contains NaN or infinity");
        for (Eigen::Index j = 1; j < p; ++j)
            if (!(t[j] > t[j - 1]))
                throw DataError("time grid not strictly increasing at index " +
                                std::to_string(j));
    } else {
        t = Eigen::VectorXd::LinSpaced(p, 0.0, 1.0);
    }
    return SampledPath{std::move(t), std::move(values)};
}

SampledPath time_augment(const SampledPath& path) {
    Eigen::MatrixXd aug(path.p(), path.d() + 1);
    aug.col(0) = path.times;
    aug.rightCols(path.d()) = path.values;
    return SampledPath{path.times, std::move(aug)};
}

std::vector<SampledPath> time_augment(const std::vector<SampledPath>& paths) {
    std::vector<SampledPath> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(time_augment(p));
    return out;
}

double total_variation(const SampledPath& path) {
    double tv = 0.0;
    for (Eigen::Index j = 1; j < path.p(); ++j)
        tv += (path.values.row(j) - path.values.row(j - 1)).norm();
    return tv;
}

SampledPath subdivide(const SampledPath& path, int extra) {
    if (extra < 0) throw ConfigError("subdivide: extra must be >= 0");
    if (extra == 0) return path;
    const Eigen::Index p = path.p();
    const Eigen::Index q = (p - 1) * (1 + extra) + 1;
    Eigen::VectorXd t(q);
    Eigen::MatrixXd v(q, path.d());
    Eigen::Index out = 0;
    for (Eigen::Index j = 0; j + 1 < p; ++j) {
        for (int s = 0; s <= extra; ++s, ++out) {
            const double w = static_cast<double>(s) / (1 + extra);
            t[out] = (1.0 - w) * path.times[j] + w * path.times[j + 1];
            v.row(out) =
                (1.0 - w) * path.values.row(j) + w * path.values.row(j + 1);
        }
    }
    t[out] = path.times[p - 1];
    v.row(out) = path.values.row(p - 1);
    return SampledPath{std::move(t), std::move(v)};
}

}  // namespace sigreg
