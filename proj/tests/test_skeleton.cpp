#include <doctest.h>

#include <algorithm>
#include <cstdlib>

#include "yarnscope/skeleton.hpp"

using namespace yarnscope;

namespace {

BinaryImage bar(int w, int h, int x0, int y0, int bw, int bh) {
    BinaryImage b(w, h);
    for (int y = y0; y < y0 + bh; ++y)
        for (int x = x0; x < x0 + bw; ++x) b(x, y) = 1;
    return b;
}

bool has_2x2_block(const BinaryImage& b) {
    for (int y = 0; y + 1 < b.height(); ++y)
        for (int x = 0; x + 1 < b.width(); ++x)
            if (b(x, y) && b(x + 1, y) && b(x, y + 1) && b(x + 1, y + 1)) return true;
    return false;
}

}  // namespace

TEST_CASE("thinning a bar leaves a one-pixel line along its axis") {
    const auto b = bar(40, 15, 5, 4, 30, 7);
    const auto s = skeletonize(b);
    CHECK_FALSE(has_2x2_block(s));
    CHECK(connected_components(s, Connectivity::Eight).count == 1);
    for (int x = 10; x < 30; ++x) {
        int n = 0;
        for (int y = 0; y < 15; ++y) n += s(x, y);
        CHECK(n == 1);
        CHECK(s(x, 7) == 1);
    }
    for (auto v : s.pixels()) CHECK(v <= 1);
}

TEST_CASE("thinning is idempotent and preserves components") {
    BinaryImage b(50, 30);
    for (int y = 3; y < 10; ++y)
        for (int x = 3; x < 45; ++x) b(x, y) = 1;
    for (int y = 15; y < 28; ++y)
        for (int x = 20; x < 26; ++x) b(x, y) = 1;
    const auto s = skeletonize(b);
    CHECK(skeletonize(s) == s);
    CHECK(connected_components(s, Connectivity::Eight).count == 2);
}

TEST_CASE("crossing number classifies ends, lines and junctions") {
    BinaryImage plus(5, 5);
    for (int i = 0; i < 5; ++i) {
        plus(2, i) = 1;
        plus(i, 2) = 1;
    }
    CHECK(crossing_number(plus, 2, 2) == 4);
    CHECK(crossing_number(plus, 2, 0) == 1);
    CHECK(crossing_number(plus, 2, 1) == 2);
    CHECK(neighbor_count(plus, 2, 2) == 4);
    CHECK(neighbor_count(plus, 1, 1) == 5);
    CHECK(neighbor_count(plus, 1, 1, Connectivity::Four) == 2);
}

TEST_CASE("diagonal steps become 4-connected corners") {
    BinaryImage d(6, 6);
    for (int i = 0; i < 6; ++i) d(i, i) = 1;
    const auto f = make_four_connected(d);
    CHECK(connected_components(f, Connectivity::Four).count == 1);
    CHECK(count_foreground(f) == 11);
}

TEST_CASE("paths split at branch points") {
    BinaryImage x(21, 21);
    for (int i = 0; i < 21; ++i) {
        x(i, 10) = 1;
        x(10, i) = 1;
    }
    const auto paths = skeleton_paths(x, Connectivity::Eight);
    CHECK(paths.size() == 4);
    for (const auto& p : paths) CHECK(p.size() == 9);

    const auto four = skeleton_paths(x, Connectivity::Four);
    CHECK(four.size() == 4);
}

TEST_CASE("a diagonal line is one path in both neighbourhoods") {
    BinaryImage d(12, 12);
    for (int i = 0; i < 12; ++i) d(i, i) = 1;
    const auto p8 = skeleton_paths(d, Connectivity::Eight);
    REQUIRE(p8.size() == 1);
    CHECK(p8[0].size() == 12);
    const auto p4 = skeleton_paths(d, Connectivity::Four);
    REQUIRE(p4.size() == 1);
    CHECK(p4[0].size() == 23);
    for (std::size_t i = 1; i < p4[0].size(); ++i) {
        CHECK(std::abs(p4[0][i].x - p4[0][i - 1].x) + std::abs(p4[0][i].y - p4[0][i - 1].y) == 1);
    }
}

TEST_CASE("a closed loop is walked once") {
    BinaryImage ring(9, 9);
    for (int i = 2; i <= 6; ++i) {
        ring(i, 2) = ring(i, 6) = 1;
        ring(2, i) = ring(6, i) = 1;
    }
    const auto paths = skeleton_paths(ring, Connectivity::Four);
    std::size_t total = 0;
    for (const auto& p : paths) total += p.size();
    CHECK(paths.size() >= 1);
    CHECK(total <= 16);
}
