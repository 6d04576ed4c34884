#include "yarnscope/skeleton.hpp"

#include <array>

namespace yarnscope {

namespace {

// Clockwise from north: P2..P9 in the usual thinning notation.
constexpr std::array<int, 8> kRingDx = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr std::array<int, 8> kRingDy = {-1, -1, 0, 1, 1, 1, 0, -1};

std::array<int, 8> ring(const BinaryImage& bin, int x, int y) {
    std::array<int, 8> p{};
    for (int k = 0; k < 8; ++k) p[k] = bin.or_zero(x + kRingDx[k], y + kRingDy[k]);
    return p;
}

int transitions(const std::array<int, 8>& p) {
    int a = 0;
    for (int k = 0; k < 8; ++k) a += (p[k] == 0 && p[(k + 1) % 8] == 1) ? 1 : 0;
    return a;
}

}  // namespace

int neighbor_count(const BinaryImage& bin, int x, int y) {
    int n = 0;
    for (int v : ring(bin, x, y)) n += v;
    return n;
}

int neighbor_count(const BinaryImage& bin, int x, int y, Connectivity connectivity) {
    if (connectivity == Connectivity::Eight) return neighbor_count(bin, x, y);
    return bin.or_zero(x, y - 1) + bin.or_zero(x + 1, y) + bin.or_zero(x, y + 1) + bin.or_zero(x - 1, y);
}

int crossing_number(const BinaryImage& bin, int x, int y) { return transitions(ring(bin, x, y)); }

BinaryImage skeletonize(const BinaryImage& bin) {
    BinaryImage img = bin;
    std::vector<Point> doomed;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int step = 0; step < 2; ++step) {
            doomed.clear();
            for (int y = 0; y < img.height(); ++y)
                for (int x = 0; x < img.width(); ++x) {
                    if (!img(x, y)) continue;
                    const auto p = ring(img, x, y);
                    int b = 0;
                    for (int v : p) b += v;
                    if (b < 2 || b > 6 || transitions(p) != 1) continue;
                    // p[0]=N p[2]=E p[4]=S p[6]=W
                    const bool ok = step == 0 ? (p[0] * p[2] * p[4] == 0 && p[2] * p[4] * p[6] == 0)
                                              : (p[0] * p[2] * p[6] == 0 && p[0] * p[4] * p[6] == 0);
                    if (ok) doomed.push_back({x, y});
                }
            for (const auto& q : doomed) img(q.x, q.y) = 0;
            changed = changed || !doomed.empty();
        }
    }
    return img;
}

BinaryImage make_four_connected(const BinaryImage& skel) {
    BinaryImage out = skel;
    for (int y = 0; y < skel.height(); ++y)
        for (int x = 0; x < skel.width(); ++x) {
            if (!skel(x, y)) continue;
            for (int dx : {-1, 1}) {
                const int nx = x + dx;
                const int ny = y + 1;
                if (!skel.or_zero(nx, ny)) continue;
                if (skel.or_zero(nx, y) || skel.or_zero(x, ny)) continue;
                out(nx, y) = 1;  // horizontal step first
            }
        }
    return out;
}

std::vector<PixelPath> skeleton_paths(const BinaryImage& skel, Connectivity connectivity) {
    const BinaryImage curve = connectivity == Connectivity::Four ? make_four_connected(skel) : skel;

    BinaryImage rest = curve;
    for (int y = 0; y < curve.height(); ++y)
        for (int x = 0; x < curve.width(); ++x) {
            if (!curve(x, y)) continue;
            const bool branch = connectivity == Connectivity::Eight
                                    ? crossing_number(curve, x, y) >= 3
                                    : neighbor_count(curve, x, y, Connectivity::Four) >= 3;
            if (!branch) continue;
            rest(x, y) = 0;
            if (connectivity == Connectivity::Four) continue;
            // Arms of a junction can still touch diagonally; cut the crowded ring too.
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    if (curve.or_zero(x + dx, y + dy) && neighbor_count(curve, x + dx, y + dy) >= 3) {
                        rest(x + dx, y + dy) = 0;
                    }
        }

    // 4-neighbours first so corner pixels are not skipped during the walk.
    static constexpr int kDx[] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int kDy[] = {0, 0, 1, -1, 1, -1, 1, -1};
    const int nbrs = connectivity == Connectivity::Eight ? 8 : 4;

    BinaryImage visited(curve.width(), curve.height());
    std::vector<PixelPath> paths;

    auto walk = [&](Point start) {
        PixelPath path{start};
        visited(start.x, start.y) = 1;
        Point cur = start;
        for (;;) {
            bool moved = false;
            for (int k = 0; k < nbrs; ++k) {
                const int nx = cur.x + kDx[k];
                const int ny = cur.y + kDy[k];
                if (rest.or_zero(nx, ny) && !visited(nx, ny)) {
                    cur = {nx, ny};
                    visited(nx, ny) = 1;
                    path.push_back(cur);
                    moved = true;
                    break;
                }
            }
            if (!moved) break;
        }
        paths.push_back(std::move(path));
    };

    // Endpoints first, then whatever remains (loops, leftovers of thick blobs).
    for (int y = 0; y < rest.height(); ++y)
        for (int x = 0; x < rest.width(); ++x)
            if (rest(x, y) && !visited(x, y) && neighbor_count(rest, x, y, connectivity) <= 1) walk({x, y});
    for (int y = 0; y < rest.height(); ++y)
        for (int x = 0; x < rest.width(); ++x)
            if (rest(x, y) && !visited(x, y)) walk({x, y});
    return paths;
}

}  // namespace yarnscope
