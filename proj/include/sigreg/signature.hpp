#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "sigreg/path.hpp"

// Truncated path signatures. The signature of a path collects the iterated
// integrals over all coordinate words; truncating at order m keeps words of
// length <= m. Coefficients are stored flat in level-major order: the
// constant 1 first, then the d order-1 entries, then the d^2 order-2 entries
// in lexicographic word order, and so on. For a piecewise-linear path the
// signature is computed exactly: a single segment has a closed form, and
// segments combine with Chen's identity.

namespace sigreg {

// Number of coefficients of orders 1..m, i.e. d + d^2 + ... + d^m (the count
// usually quoted for signature feature vectors; the stored vector additionally
// carries the order-0 constant in front). Throws CapacityError if the result
// would overflow std::size_t.
std::size_t sig_dim(int d, int m);

// Flat layout of a truncated signature with path dimension d and truncation
// order m. Construction enforces the global coefficient budget.
struct SigShape {
    int d = 0;
    int m = 0;
    std::size_t len = 0;  // 1 + sig_dim(d, m)

    SigShape() = default;
    SigShape(int d, int m);

    // Start of the order-k block in the flat vector; level_offset(m + 1) == len.
    std::size_t level_offset(int k) const { return offsets_[k]; }
    std::size_t level_size(int k) const { return offsets_[k + 1] - offsets_[k]; }

    friend bool operator==(const SigShape& a, const SigShape& b) {
        return a.d == b.d && a.m == b.m;
    }

private:
    std::vector<std::size_t> offsets_;  // m + 2 entries
};

// Flat index of the coefficient for a word of coordinate indices in 1..d.
// The empty word maps to 0 (the constant). Throws ConfigError for words
// longer than m or entries outside 1..d.
std::size_t index_of(const SigShape& shape, std::span<const int> word);

struct TruncatedSignature {
    SigShape shape;
    std::vector<double> coeffs;  // shape.len entries, coeffs[0] == 1
};

// Exact signature of a single straight segment with the given displacement:
// the order-k block is the k-th tensor power of the displacement divided
// by k!.
TruncatedSignature linear_segment_signature(const Eigen::VectorXd& displacement,
                                            int m);

// Chen's identity: the signature of the concatenation of two paths is the
// truncated tensor product of their signatures. Shapes must agree.
TruncatedSignature chen_concat(const TruncatedSignature& a,
                               const TruncatedSignature& b);

// Signature of a sampled path, exact for its piecewise-linear interpolant:
// folds the per-segment closed forms with Chen's identity. Single-threaded;
// cost O(p * m * d^m).
TruncatedSignature signature(const SampledPath& path, int m);

// Signatures of a batch of paths (all with the same d), one row per path,
// row length SigShape(d, m).len. Rows are independent, so they are computed
// in parallel with OpenMP; results are identical to the serial variant and
// do not depend on thread count.
Eigen::MatrixXd batch_signatures(const std::vector<SampledPath>& paths, int m);

// Plain-loop reference implementation built from the public per-segment and
// Chen operations. Kept for tests and the benchmark target.
Eigen::MatrixXd batch_signatures_serial(const std::vector<SampledPath>& paths,
                                        int m);

namespace detail {

// acc <- acc (x) other over the truncated tensor algebra, both flat vectors
// of shape `shape`. Levels are updated highest first so the lower levels of
// acc still hold the left operand when they are read.
void chen_inplace(const SigShape& shape, double* acc, const double* other);

// Writes the straight-segment signature for `displacement` (length shape.d)
// into `out` (length shape.len).
void segment_signature_into(const SigShape& shape, const double* displacement,
                            double* out);

// Fold of segment signatures along one path, reusing a caller-provided
// segment buffer. `acc` receives the full signature.
void signature_into(const SampledPath& path, const SigShape& shape,
                    double* acc, std::vector<double>& seg_buffer);

}  // namespace detail

}  // namespace sigreg
