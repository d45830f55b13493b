#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "sigreg/common.hpp"
#include "sigreg/path.hpp"

using namespace sigreg;

namespace {

SampledPath line2d() {
    Eigen::MatrixXd v(3, 2);
    v << 0.0, 0.0, 1.0, 2.0, 3.0, -1.0;
    return from_matrix(v);
}

}  // namespace

TEST_CASE("from_matrix defaults to the uniform grid on [0, 1]") {
    const SampledPath path = line2d();
    REQUIRE(path.p() == 3);
    REQUIRE(path.d() == 2);
    CHECK(path.times[0] == 0.0);
    CHECK(path.times[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(path.times[2] == 1.0);

    Eigen::MatrixXd v(5, 1);
    v << 1, 2, 3, 4, 5;
    const SampledPath p5 = from_matrix(v);
    for (int j = 0; j < 5; ++j)
        CHECK(p5.times[j] == doctest::Approx(j / 4.0).epsilon(1e-15));
}

TEST_CASE("from_matrix keeps explicit times exactly as given") {
    Eigen::MatrixXd v(3, 1);
    v << 0.0, 1.0, 4.0;
    Eigen::VectorXd t(3);
    t << -2.0, 0.25, 17.0;
    const SampledPath path = from_matrix(v, t);
    CHECK(path.times[0] == -2.0);
    CHECK(path.times[1] == 0.25);
    CHECK(path.times[2] == 17.0);
}

TEST_CASE("from_matrix rejects malformed input") {
    Eigen::MatrixXd one_row(1, 2);
    one_row << 0.0, 0.0;
    CHECK_THROWS_AS(from_matrix(one_row), DataError);

    CHECK_THROWS_AS(from_matrix(Eigen::MatrixXd(3, 0)), DataError);

    Eigen::MatrixXd with_nan(2, 1);
    with_nan << 0.0, std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(from_matrix(with_nan), DataError);

    Eigen::MatrixXd with_inf(2, 1);
    with_inf << 0.0, std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(from_matrix(with_inf), DataError);

    Eigen::MatrixXd v(3, 1);
    v << 0.0, 1.0, 2.0;
    Eigen::VectorXd bad_len(2);
    bad_len << 0.0, 1.0;
    CHECK_THROWS_AS(from_matrix(v, bad_len), DataError);

    Eigen::VectorXd repeated(3);
    repeated << 0.0, 0.5, 0.5;
    CHECK_THROWS_AS(from_matrix(v, repeated), DataError);

    Eigen::VectorXd decreasing(3);
    decreasing << 0.0, 0.7, 0.3;
    CHECK_THROWS_AS(from_matrix(v, decreasing), DataError);

    Eigen::VectorXd nan_time(3);
    nan_time << 0.0, std::numeric_limits<double>::quiet_NaN(), 1.0;
    CHECK_THROWS_AS(from_matrix(v, nan_time), DataError);
}

TEST_CASE("time_augment prepends the time coordinate") {
    const SampledPath path = line2d();
    const SampledPath aug = time_augment(path);
    REQUIRE(aug.d() == 3);
    REQUIRE(aug.p() == path.p());
    for (Eigen::Index r = 0; r < path.p(); ++r) {
        CHECK(aug.values(r, 0) == path.times[r]);
        CHECK(aug.values(r, 1) == path.values(r, 0));
        CHECK(aug.values(r, 2) == path.values(r, 1));
    }
    CHECK((aug.times - path.times).lpNorm<Eigen::Infinity>() == 0.0);

    // Constant paths gain a nonzero increment through the time coordinate.
    Eigen::MatrixXd flat(4, 1);
    flat << 5.0, 5.0, 5.0, 5.0;
    const SampledPath aug_flat = time_augment(from_matrix(flat));
    CHECK(aug_flat.values(3, 0) - aug_flat.values(0, 0) == 1.0);
}

TEST_CASE("time_augment maps over batches") {
    const std::vector<SampledPath> batch{line2d(), line2d()};
    const auto out = time_augment(batch);
    REQUIRE(out.size() == 2);
    CHECK(out[0].d() == 3);
    CHECK(out[1].d() == 3);
}

TEST_CASE("total_variation sums segment lengths") {
    // Two segments of Euclidean lengths sqrt(1 + 4) and sqrt(4 + 9).
    const SampledPath path = line2d();
    CHECK(total_variation(path) ==
          doctest::Approx(std::sqrt(5.0) + std::sqrt(13.0)).epsilon(1e-15));

    Eigen::MatrixXd flat(3, 2);
    flat << 1.0, 2.0, 1.0, 2.0, 1.0, 2.0;
    CHECK(total_variation(from_matrix(flat)) == 0.0);

    // 1-d sawtooth: |1| + |-2| + |3| = 6.
    Eigen::MatrixXd saw(4, 1);
    saw << 0.0, 1.0, -1.0, 2.0;
    CHECK(total_variation(from_matrix(saw)) == doctest::Approx(6.0));
}

TEST_CASE("subdivide preserves the interpolant") {
    const SampledPath path = line2d();
    const SampledPath fine = subdivide(path, 3);
    REQUIRE(fine.p() == 2 * 4 + 1);  // 3 extra points inside each segment

    // Original vertices appear unchanged.
    CHECK(fine.times[0] == path.times[0]);
    CHECK(fine.times[4] == doctest::Approx(path.times[1]).epsilon(1e-15));
    CHECK(fine.times[8] == path.times[2]);
    CHECK((fine.values.row(4) - path.values.row(1)).lpNorm<Eigen::Infinity>() <=
          1e-15);

    // Interior points sit on the segment.
    for (Eigen::Index r = 0; r + 1 < fine.p(); ++r) {
        const double t = fine.times[r];
        Eigen::Index seg = t < path.times[1] ? 0 : 1;
        const double a = (t - path.times[seg]) /
                         (path.times[seg + 1] - path.times[seg]);
        const Eigen::RowVectorXd expect = (1.0 - a) * path.values.row(seg) +
                                          a * path.values.row(seg + 1);
        CHECK((fine.values.row(r) - expect).lpNorm<Eigen::Infinity>() <= 1e-12);
    }

    // Times stay strictly increasing.
    for (Eigen::Index r = 0; r + 1 < fine.p(); ++r)
        CHECK(fine.times[r] < fine.times[r + 1]);

    // extra == 0 is the identity.
    const SampledPath same = subdivide(path, 0);
    CHECK(same.p() == path.p());
    CHECK((same.values - path.values).lpNorm<Eigen::Infinity>() == 0.0);
}
