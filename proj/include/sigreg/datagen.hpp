#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sigreg/path.hpp"

// Synthetic functional-regression datasets. All generators draw through
// per-sample, per-coordinate substreams of the master seed, so output is
// independent of evaluation order and thread count, and regenerating with the
// same SimSpec is bit-identical.

namespace sigreg {

enum class SimModel { polysinus, gaussian_process };
enum class SimResponse { signature, mean_next_step, trend_norm };

struct SimSpec {
    std::size_t n = 0;  // number of sample paths
    int d = 0;          // path dimension
    int p = 0;          // sampling points per path
    std::uint64_t seed = 0;
    SimModel model = SimModel::polysinus;
    SimResponse response = SimResponse::signature;
    int m_star = 5;     // true order for the signature response
};

// Smooth random curves: each coordinate is
//   a1 + 10*a2*sin(2*pi*t/a3) + 10*(t - a4)^3,  a1..a4 ~ U[0,1].
// Values stay inside [-20, 21]. For the mean_next_step response the grid is
// t_j = j/p, j = 0..p-1 (the path stops one step short of t = 1) and
// next_values holds the coordinates at t = 1; otherwise the grid is
// t_j = j/(p-1) and next_values is empty.
struct PolysinusData {
    std::vector<SampledPath> paths;
    Eigen::MatrixXd alphas;       // n x 4d, sample-major (a1..a4 per coord)
    Eigen::MatrixXd next_values;  // n x d, or 0 x 0
};
PolysinusData gen_polysinus(const SimSpec& spec);

// Y = <beta, S(x)> + eps on the raw (unaugmented) paths, with beta_j = u_j/1000
// over the full flat coefficient vector (u_j ~ U[0,1]) and eps ~ U[-100, 100].
// beta and noise are returned so noiseless targets can be reconstructed.
struct SignatureResponse {
    Eigen::VectorXd targets;
    Eigen::VectorXd beta;   // length SigShape(d, m_star).len
    Eigen::VectorXd noise;  // length n
};
SignatureResponse gen_signature_response(const std::vector<SampledPath>& paths,
                                         int m_star, std::uint64_t seed);

// Y = mean over coordinates of the path value one step past the observed
// grid. Requires data generated with SimResponse::mean_next_step.
Eigen::VectorXd gen_mean_next_step(const PolysinusData& data);

// Rough random curves: each coordinate is a^k * t + xi_t with a^k ~ U[-3, 3]
// and xi a centered Gaussian process with covariance exp(-|s - t|) on the
// grid t_j = j/(p-1). Y = ||a||_2 (noiseless).
struct GaussianProcessData {
    std::vector<SampledPath> paths;
    Eigen::VectorXd targets;
    Eigen::MatrixXd alphas;  // n x d
};
GaussianProcessData gen_gaussian_process(const SimSpec& spec);

// Model/response dispatcher used by the CLI. Valid combinations:
// polysinus + signature, polysinus + mean_next_step, gaussian_process +
// trend_norm.
struct Dataset {
    std::vector<SampledPath> paths;
    Eigen::VectorXd targets;
};
Dataset generate(const SimSpec& spec);

}  // namespace sigreg
