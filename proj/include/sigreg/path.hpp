#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

// Discretely sampled d-dimensional paths. A path is a matrix of values
// (one row per sampling time) plus a strictly increasing time grid; all
// downstream code treats it as the piecewise-linear interpolant of those
// points. Times are used exactly as given — signatures do not change under
// reparametrisation, so only their order matters, and generated data uses
// grids in [0, 1].

namespace sigreg {

struct SampledPath {
    Eigen::VectorXd times;   // p entries, strictly increasing
    Eigen::MatrixXd values;  // p x d

    Eigen::Index p() const { return values.rows(); }
    Eigen::Index d() const { return values.cols(); }
};

// Validates and packages a raw value matrix. Times default to the uniform
// grid j/(p-1) on [0, 1]. Throws DataError on p < 2, d < 1, non-finite
// entries, or a time grid that is not strictly increasing.
SampledPath from_matrix(Eigen::MatrixXd values,
                        std::optional<Eigen::VectorXd> times = std::nullopt);

// Prepends the time coordinate: values become p x (d+1) with column 0 equal
// to the sampling times. Makes the signature determine the path up to
// translation, and gives a constant path a nonzero level-1 block.
SampledPath time_augment(const SampledPath& path);
std::vector<SampledPath> time_augment(const std::vector<SampledPath>& paths);

// Total variation of the piecewise-linear interpolant: sum of Euclidean
// norms of the increments. Zero only for a constant path.
double total_variation(const SampledPath& path);

// Inserts `extra` equally spaced points inside every segment (linear
// interpolation). The interpolant — and hence the signature — is unchanged.
SampledPath subdivide(const SampledPath& path, int extra);

}  // namespace sigreg
