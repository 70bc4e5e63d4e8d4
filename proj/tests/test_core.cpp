// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "kflow/core.hpp"

using namespace kflow;

TEST_CASE("Vec3 arithmetic and norms") {
    Vec3 a{1.0, 2.0, 3.0};
    Vec3 b{-2.0, 0.5, 4.0};
    CHECK((a + b) == Vec3{-1.0, 2.5, 7.0});
    CHECK((a - b) == Vec3{3.0, 1.5, -1.0});
    CHECK((a * 2.0) == Vec3{2.0, 4.0, 6.0});
    CHECK((-a) == Vec3{-1.0, -2.0, -3.0});
    CHECK(a.dot(b) == doctest::Approx(-2.0 + 1.0 + 12.0));
    CHECK(a.squared_norm() == doctest::Approx(14.0));
    CHECK(a.norm() == doctest::Approx(std::sqrt(14.0)));
    CHECK(a[0] == 1.0);
    CHECK(a[1] == 2.0);
    CHECK(a[2] == 3.0);
    CHECK(squared_distance(a, b) == doctest::Approx(9.0 + 2.25 + 1.0));
}

TEST_CASE("Vec3 finiteness") {
    CHECK(Vec3{0, 0, 0}.finite());
    CHECK_FALSE(Vec3{std::numeric_limits<double>::quiet_NaN(), 0, 0}.finite());
    CHECK_FALSE(Vec3{0, std::numeric_limits<double>::infinity(), 0}.finite());
}

TEST_CASE("PointCloud rejects empty and non-finite input") {
    CHECK_THROWS_AS(PointCloud(std::vector<Vec3>{}), std::invalid_argument);
    std::vector<Vec3> bad{{0, 0, 0}, {1, std::nan(""), 2}};
    CHECK_THROWS_AS(PointCloud{bad}, std::invalid_argument);
    PointCloud ok(std::vector<Vec3>{{1, 2, 3}, {4, 5, 6}});
    CHECK(ok.size() == 2);
    CHECK(ok[1] == Vec3{4, 5, 6});
}

TEST_CASE("FlowField basics") {
    CHECK_THROWS_AS(FlowField(std::vector<Vec3>{{0, 0, std::nan("")}}), std::invalid_argument);
    FlowField z = FlowField::zeros(3);
    CHECK(z.size() == 3);
    CHECK(z[2] == Vec3{0, 0, 0});
    FlowField f(std::vector<Vec3>{{1, -2, 3}});
    CHECK(f.negated()[0] == Vec3{-1, 2, -3});
}

TEST_CASE("apply_flow adds per-index displacements") {
    PointCloud cloud(std::vector<Vec3>{{0, 0, 0}, {1, 1, 1}});
    FlowField flow(std::vector<Vec3>{{0.5, 0, 0}, {0, -1, 2}});
    PointCloud moved = apply_flow(cloud, flow);
    CHECK(moved[0] == Vec3{0.5, 0, 0});
    CHECK(moved[1] == Vec3{1, 0, 3});
    CHECK_THROWS_AS(apply_flow(cloud, FlowField::zeros(3)), std::invalid_argument);
}

TEST_CASE("bounding_box covers all clouds plus padding") {
    PointCloud a(std::vector<Vec3>{{-1, 0, 2}, {3, 1, -4}});
    PointCloud b(std::vector<Vec3>{{0, -5, 0}});
    Aabb box = bounding_box(a, b, 0.5);
    CHECK(box.min == Vec3{-1.5, -5.5, -4.5});
    CHECK(box.max == Vec3{3.5, 1.5, 2.5});

    Aabb single = bounding_box(a);
    CHECK(single.min == Vec3{-1, 0, -4});
    CHECK(single.max == Vec3{3, 1, 2});

    CHECK_THROWS_AS(bounding_box(std::vector<const PointCloud*>{}), std::invalid_argument);
    CHECK_THROWS_AS(bounding_box(a, -1.0), std::invalid_argument);
}

TEST_CASE("Aabb validates ordering") {
    CHECK_THROWS_AS(Aabb(Vec3{1, 0, 0}, Vec3{0, 1, 1}), std::invalid_argument);
    Aabb ok(Vec3{0, 0, 0}, Vec3{2, 3, 4});
    CHECK(ok.extent() == Vec3{2, 3, 4});
}

TEST_CASE("Matrix is row-major with contiguous rows") {
    Matrix m(2, 3, 0.0);
    m(0, 0) = 1;
    m(0, 2) = 3;
    m(1, 1) = 5;
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(m.size() == 6);
    CHECK(m.data()[2] == 3);
    CHECK(m.row(1)[1] == 5);
    const Matrix& c = m;
    CHECK(c(1, 1) == 5);
}
