// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <unistd.h>

#include "yarnscope/crosssection.hpp"
#include "yarnscope/grade.hpp"
#include "yarnscope/hairiness.hpp"
#include "yarnscope/image_io.hpp"
#include "yarnscope/metrology.hpp"
#include "yarnscope/slub.hpp"
#include "yarnscope/splice.hpp"
#include "yarnscope/stats.hpp"
#include "yarnscope/synthgen.hpp"
#include "yarnscope/texture.hpp"
#include "yarnscope/twist.hpp"

using namespace yarnscope;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

// Accumulates failing checks; the first few are kept for the detail line.
struct Checker {
    int failed = 0;
    int total = 0;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        ++total;
        if (ok) return;
        ++failed;
        if (notes.size() < 4) notes.push_back(what);
    }
    Verdict verdict(const std::string& summary) const {
        std::string d = summary + " (" + std::to_string(total - failed) + "/" + std::to_string(total) + " checks)";
        for (const auto& n : notes) d += "; " + n;
        return {failed == 0, d};
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s.precision(digits);
    s << std::fixed << v;
    return s.str();
}

long round3(double v) { return std::lround(v * 1000.0); }

fs::path work_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("yarnscope_acceptance_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string cli_path() {
    if (const char* env = std::getenv("YARNSCOPE_CLI_PATH")) return env;
    return YARNSCOPE_CLI_PATH;
}

std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

// Runs the command-line tool with stdout redirected to `out`; returns its exit status.
int run_cli(const std::string& args, const fs::path& out) {
    const std::string cmd = quote(cli_path()) + " " + args + " > " + quote(out.string()) + " 2> /dev/null";
    const int rc = std::system(cmd.c_str());
    return rc == -1 ? -1 : WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json run_cli_json(const std::string& args, const std::string& tag) {
    const auto out = work_dir() / (tag + ".json");
    const int rc = run_cli(args, out);
    if (rc != 0) throw std::runtime_error("'" + args + "' exited " + std::to_string(rc));
    return json::parse(slurp(out));
}

Verdict criterion1() {
    Checker c;
    const auto t0 = std::chrono::steady_clock::now();
    const auto cal = metrology::calibrate(34, 0.5);
    const double mm = metrology::px_to_mm(cal, 10.2);
    const double dt = seconds_since(t0);
    c.check(round3(cal.pixels_per_mm()) == 68000, "px/mm = " + fmt(cal.pixels_per_mm(), 6));
    c.check(round3(mm) == 150, "diameter = " + fmt(mm, 6) + " mm");
    c.check(dt < 1e-3, "runtime " + fmt(dt * 1e3, 3) + " ms");
    return c.verdict("68 px/mm, 10.2 px -> " + fmt(mm, 3) + " mm in " + fmt(dt * 1e6, 1) + " us");
}

Verdict criterion2() {
    Checker c;
    const auto band = metrology::trommer_band({40, metrology::CountSystem::Ne1});
    c.check(round3(band.min_mm) == 134, "min " + fmt(band.min_mm, 5));
    c.check(round3(band.max_mm) == 154, "max " + fmt(band.max_mm, 5));
    c.check(band.contains(0.15), "0.15 outside band");
    return c.verdict("Ne1 40 band (" + fmt(band.min_mm, 3) + ", " + fmt(band.max_mm, 3) + ") mm");
}

Verdict criterion3() {
    const std::vector<std::uint8_t> in{
        246, 255, 250, 245, 253, 255, 255, 255,  //
        167, 192, 207, 221, 245, 255, 255, 255,  //
        128, 127, 136, 157, 194, 224, 246, 255,  //
        175, 154, 134, 123, 127, 139, 165, 186,  //
        165, 163, 162, 175, 156, 134, 123, 120,  //
        64,  98,  130, 163, 163, 173, 179, 163,  //
        10,  19,  41,  65,  96,  132, 159, 188,  //
        4,   9,   13,  16,  23,  35,  57,  93};
    const std::vector<std::uint8_t> expected{
        0,   0,   0,   0,   0,   0,   0,   0,    //
        167, 0,   0,   0,   0,   0,   0,   0,    //
        128, 127, 136, 157, 0,   0,   0,   0,    //
        175, 154, 134, 123, 127, 139, 165, 0,    //
        165, 163, 162, 175, 156, 134, 123, 120,  //
        0,   98,  130, 163, 163, 173, 179, 163,  //
        0,   0,   0,   0,   96,  132, 159, 0,    //
        0,   0,   0,   0,   0,   0,   0,   0};
    const auto out = band_threshold(GrayImage(8, 8, in), 80, 180);
    Checker c;
    int matches = 0;
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            const bool ok = out(x, y) == expected[y * 8 + x];
            matches += ok ? 1 : 0;
            c.check(ok, "row " + std::to_string(y + 1) + " col " + std::to_string(x + 1) + ": input " +
                            std::to_string(in[y * 8 + x]) + " -> " + std::to_string(out(x, y)) + ", printed " +
                            std::to_string(expected[y * 8 + x]));
        }
    return c.verdict(std::to_string(matches) + "/64 cells match");
}

Verdict criterion4() {
    Checker c;
    double worst = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int w = 5; w <= 60; ++w) {
        synth::YarnRenderSpec s;
        s.core_width = w;
        s.height = w + 40;
        s.core_axis = s.height / 2;
        const auto img = synth::render_plain_yarn(s);
        for (auto mode : {metrology::DiameterMode::Percentile, metrology::DiameterMode::Inflection}) {
            metrology::HistogramDiameterOptions o;
            o.mode = mode;
            const double d = metrology::histogram_level_diameter(img, o);
            worst = std::max(worst, std::abs(d - w));
            c.check(std::abs(d - w) <= 1.0, "w=" + std::to_string(w) + " got " + fmt(d, 2));
        }
    }
    const double dt = seconds_since(t0);
    c.check(dt < 5.0, "sweep took " + fmt(dt, 2) + " s");
    return c.verdict("w 5..60 both modes, worst error " + fmt(worst, 2) + " px, " + fmt(dt, 2) + " s");
}

Verdict criterion5() {
    Checker c;
    double worst_fft = 0;
    double worst_lines = 0;
    double worst_gap = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int a = 10; a <= 45; a += 5) {
        synth::YarnRenderSpec s;
        s.width = 256;
        s.height = 96;
        s.core_width = 48;
        s.core_axis = 48;
        s.twist_angle_deg = a;
        const auto core = twist::extract_core(synth::render_twist_stripes(s)).core;
        const double f = twist::dominant_angle_fft(core).angle_deg;
        const double l = twist::dominant_angle_lines(core).angle_deg;
        worst_fft = std::max(worst_fft, std::abs(f - a));
        worst_lines = std::max(worst_lines, std::abs(l - a));
        worst_gap = std::max(worst_gap, std::abs(f - l));
        const std::string at = std::to_string(a) + " deg: fft " + fmt(f, 2) + " lines " + fmt(l, 2);
        c.check(std::abs(f - a) <= 2.0, at);
        c.check(std::abs(l - a) <= 2.0, at);
        c.check(std::abs(f - l) <= 3.0, at);
    }
    const double dt = seconds_since(t0);
    c.check(dt < 10.0, "took " + fmt(dt, 2) + " s");
    return c.verdict("worst fft " + fmt(worst_fft, 2) + ", lines " + fmt(worst_lines, 2) + ", gap " +
                     fmt(worst_gap, 2) + " deg, " + fmt(dt, 2) + " s");
}

// Computational formulas over raw sums.
struct AnovaOracle {
    double ss_between, ss_error, f;
};

AnovaOracle anova_oracle(const stats::Groups& g) {
    double grand = 0;
    double sum_sq = 0;
    double sum_t2_over_n = 0;
    double n_total = 0;
    for (const auto& grp : g) {
        double t = 0;
        for (double x : grp) {
            t += x;
            sum_sq += x * x;
        }
        grand += t;
        n_total += static_cast<double>(grp.size());
        sum_t2_over_n += t * t / static_cast<double>(grp.size());
    }
    const double correction = grand * grand / n_total;
    const double ss_total = sum_sq - correction;
    const double ss_between = sum_t2_over_n - correction;
    const double ss_error = ss_total - ss_between;
    const double k = static_cast<double>(g.size());
    return {ss_between, ss_error, (ss_between / (k - 1)) / (ss_error / (n_total - k))};
}

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(b), 1e-300); }

Verdict criterion6() {
    Checker c;
    const std::vector<double> means{38.01, 41.91, 23.86};
    const std::vector<std::size_t> ns{5, 5, 5};
    const auto pw = stats::pairwise_mean_diff(means, ns, 22.106, 12);
    auto find = [&](std::size_t i, std::size_t j) {
        for (const auto& p : pw)
            if (p.i == i && p.j == j) return p;
        throw std::runtime_error("pair missing");
    };
    const struct {
        std::size_t i, j;
        double diff;
    } table[] = {{0, 1, -3.896}, {0, 2, 14.154}, {1, 2, 18.050}};
    std::string diffs;
    for (const auto& row : table) {
        const auto p = find(row.i, row.j);
        diffs += (diffs.empty() ? "" : ", ") + fmt(p.diff, 3);
        c.check(std::abs(p.diff - row.diff) <= 0.01, "diff " + fmt(p.diff, 4) + " vs " + fmt(row.diff, 3));
        c.check(std::abs(p.se - 2.974) <= 0.001, "SE " + fmt(p.se, 5));
    }

    std::mt19937 gen(2024);
    std::uniform_int_distribution<int> kdist(2, 6);
    std::uniform_int_distribution<int> ndist(2, 12);
    std::normal_distribution<double> noise(0, 1);
    double worst = 0;
    for (int design = 0; design < 50; ++design) {
        const int k = kdist(gen);
        const int n = ndist(gen);
        stats::Groups g(k);
        for (int i = 0; i < k; ++i) {
            const double mu = 20 + 5 * noise(gen);
            for (int r = 0; r < n; ++r) g[i].push_back(mu + 3 * noise(gen));
        }
        const auto got = stats::one_way_anova(g);
        const auto ref = anova_oracle(g);
        const bool has_f = got.f.has_value();
        c.check(has_f, "design " + std::to_string(design) + " has no finite F");
        if (!has_f) continue;
        worst = std::max({worst, std::abs(got.between.sum_of_squares - ref.ss_between) / ref.ss_between,
                          std::abs(got.error.sum_of_squares - ref.ss_error) / ref.ss_error,
                          std::abs(*got.f - ref.f) / ref.f});
        c.check(rel_close(got.between.sum_of_squares, ref.ss_between, 1e-9), "SS_between design " + std::to_string(design));
        c.check(rel_close(got.error.sum_of_squares, ref.ss_error, 1e-9), "SS_error design " + std::to_string(design));
        c.check(rel_close(*got.f, ref.f, 1e-9), "F design " + std::to_string(design));
        c.check(got.between.df == k - 1 && got.error.df == k * (n - 1), "df design " + std::to_string(design));
    }
    return c.verdict("diffs (" + diffs + "), SE " + fmt(find(0, 1).se, 4) + "; 50 ANOVA designs, worst rel err " +
                     [&] {
                         std::ostringstream s;
                         s << worst;
                         return s.str();
                     }());
}

hairiness::HDDP planted_profile(double m, double b, double sigma, std::mt19937* gen) {
    hairiness::HDDP h;
    h.bin_width_mm = 0.05;
    h.scan_length_mm = 1;
    std::normal_distribution<double> noise(0, sigma);
    for (int i = 0; i < 15; ++i) {
        const double x = std::log10(h.bin_center(i));
        const double y = m * x + b + (gen ? noise(*gen) : 0.0);
        h.counts.push_back(1);
        h.density.push_back(std::pow(10.0, y));
    }
    return h;
}

Verdict criterion7() {
    Checker c;
    const double m = -1.67501;
    const double b = 1.409163;
    const auto exact = hairiness::fit_loglinear(planted_profile(m, b, 0, nullptr), 0, 0.75);
    c.check(std::abs(exact.m - m) <= 1e-6, "m " + fmt(exact.m, 8));
    c.check(std::abs(exact.b - b) <= 1e-6, "b " + fmt(exact.b, 8));
    c.check(std::abs(exact.r2 - 1) <= 1e-12, "R2 " + fmt(exact.r2, 12));
    int good = 0;
    double lowest = 1;
    for (std::uint32_t seed = 0; seed < 100; ++seed) {
        std::mt19937 gen(seed);
        const auto fit = hairiness::fit_loglinear(planted_profile(m, b, 0.01, &gen), 0, 0.75);
        lowest = std::min(lowest, fit.r2);
        if (fit.r2 >= 0.97) ++good;
    }
    c.check(good >= 95, std::to_string(good) + "/100 seeds with R2 >= 0.97");
    return c.verdict("m " + fmt(exact.m, 6) + ", b " + fmt(exact.b, 6) + ", R2 " + fmt(exact.r2, 9) + "; noisy " +
                     std::to_string(good) + "/100 seeds R2 >= 0.97, min " + fmt(lowest, 4));
}

Verdict criterion8() {
    Checker c;
    const metrology::Calibration cal(10);
    synth::YarnRenderSpec s;
    s.width = 5800;
    s.height = 64;
    s.core_width = 10;
    s.core_axis = 32;
    int x = 200;
    for (int cycle = 0; cycle < 3; ++cycle) {
        s.slubs.push_back({x, 300, 25});
        x += 300 + 400;
        s.slubs.push_back({x, 500, 25});
        x += 500 + 600;
    }
    const auto rep = slub::detect_slubs(metrology::width_profile(otsu_binarize(synth::render_slub_yarn(s))), cal);
    c.check(rep.segments.size() == 6, std::to_string(rep.segments.size()) + " slubs found");
    for (std::size_t i = 0; i < rep.segments.size() && i < 6; ++i) {
        const double want_len = i % 2 ? 50 : 30;
        c.check(std::abs(rep.segments[i].length_mm - want_len) <= 1, "length " + fmt(rep.segments[i].length_mm, 2));
        c.check(std::abs(rep.segments[i].amplitude_pct - 250) <= 5, "amplitude " + fmt(rep.segments[i].amplitude_pct, 1));
    }
    for (std::size_t i = 0; i < rep.distances_mm.size(); ++i) {
        const double want = i % 2 ? 60 : 40;
        c.check(std::abs(rep.distances_mm[i] - want) <= 1, "distance " + fmt(rep.distances_mm[i], 2));
    }
    const auto period = rep.segments.size() >= 3 ? slub::slub_period(rep) : std::nullopt;
    c.check(period == 2, "period " + (period ? std::to_string(*period) : std::string("none")));

    synth::YarnRenderSpec bumps;
    bumps.width = 1200;
    bumps.core_width = 10;
    bumps.slubs = {{100, 190, 25}, {400, 100, 25}, {700, 199, 30}, {1000, 50, 25}};
    const auto rejected = slub::detect_slubs(metrology::width_profile(otsu_binarize(synth::render_slub_yarn(bumps))), cal);
    c.check(rejected.segments.empty(), std::to_string(rejected.segments.size()) + " sub-20 mm bumps accepted");

    // The same pattern through the command-line tool.
    const auto img = work_dir() / "slub_table3.pgm";
    const int rc = run_cli("synth --preset slub-table3 --image-out " + quote(img.string()), work_dir() / "synth_slub.json");
    c.check(rc == 0, "synth exited " + std::to_string(rc));
    const auto res = run_cli_json("slub --image " + quote(img.string()) + " --cal 10", "slub_cli")["result"];
    const auto r = res.contains("lanes") ? res["lanes"][0] : res;
    const std::vector<double> lens{30, 50, 30, 50};
    const std::vector<double> gaps{40, 60, 40};
    c.check(r["n_slubs"] == 4, "cli slubs " + r["n_slubs"].dump());
    for (std::size_t i = 0; i < r["segments"].size() && i < 4; ++i) {
        c.check(std::abs(r["segments"][i]["length_mm"].get<double>() - lens[i]) <= 1, "cli length");
        c.check(std::abs(r["segments"][i]["amplitude_pct"].get<double>() - 250) <= 5, "cli amplitude");
    }
    for (std::size_t i = 0; i < r["distances_mm"].size() && i < 3; ++i)
        c.check(std::abs(r["distances_mm"][i].get<double>() - gaps[i]) <= 1, "cli distance");
    c.check(r["period_segments"] == 2, "cli period " + r["period_segments"].dump());
    return c.verdict("6 planted slubs, period " + (period ? std::to_string(*period) : std::string("none")) +
                     ", short bumps rejected, CLI round trip");
}

// Rule table written out row by row, independent of the classifier's branching.
splice::Grade rule_table(double l, double r1, double r2, double r3) {
    using G = splice::Grade;
    struct Rule {
        double l_lo, l_hi;  // [lo, hi)
        int zone;           // ratio tested: 1, 2 or 3
        double r_lo, r_hi;  // (lo, hi] for zone 1 defect rows, [lo, hi) otherwise
        G grade;
    };
    const double inf = 1e300;
    static const Rule rules[] = {
        {0, 5, 1, 1, 2, G::C2},      {0, 5, 1, 2, inf, G::C1},
        {5, 10, 2, 2, inf, G::B1},   {5, 10, 2, 1, 2, G::B2},
        {5, 10, 2, 0.5, 1, G::E},    {5, 10, 2, -inf, 0.5, G::F},
        {10, inf, 3, 1, inf, G::A},  {10, inf, 3, -inf, 1, G::E},
    };
    if (r1 <= 1) return G::D;
    for (const auto& rule : rules) {
        if (l < rule.l_lo || l >= rule.l_hi) continue;
        const double r = rule.zone == 1 ? r1 : rule.zone == 2 ? r2 : r3;
        if (r >= rule.r_lo && r < rule.r_hi) return rule.grade;
    }
    throw std::logic_error("rule table has no row");
}

Verdict criterion9() {
    Checker c;
    const double y = 0.4;
    const std::vector<double> ls{1, 3, 4.99, 5, 7, 9.99, 10, 12, 15, 20};
    const std::vector<double> r1s{0.5, 0.9, 1.0, 1.01, 1.5, 1.99, 2.0, 2.5, 3, 4};
    const std::vector<double> r2s{0.2, 0.49, 0.5, 0.9, 1.0, 1.5, 1.99, 2.0, 2.5, 3};
    const std::vector<double> r3s{0.2, 0.5, 0.9, 0.99, 1.0, 1.01, 1.5, 2, 3, 4};
    std::map<splice::Grade, int> reached;
    int agree = 0;
    int points = 0;
    for (double l : ls)
        for (double r1 : r1s)
            for (double r2 : r2s)
                for (double r3 : r3s) {
                    splice::OpeningMeasurement m;
                    m.y_mm = y;
                    m.l_mm = l;
                    m.w1_mm = r1 * y;
                    m.w2_mm = r2 * y;
                    m.w3_mm = r3 * y;
                    // Ratios are compared on the values the classifier sees.
                    const auto got = splice::classify_opening(m);
                    const auto want = rule_table(l, m.w1_mm / y, *m.w2_mm / y, *m.w3_mm / y);
                    ++points;
                    ++reached[got];
                    if (got == want) ++agree;
                }
    c.check(points == 10000 && agree == points, std::to_string(agree) + "/" + std::to_string(points) + " agree");
    c.check(reached.size() == 8, std::to_string(reached.size()) + " grades reached");

    int recovered = 0;
    std::string misses;
    for (auto g : splice::kAllGrades) {
        const std::string name = splice::to_string(g);
        const auto img = work_dir() / ("splice_" + name + ".pgm");
        const int rc = run_cli("synth --preset splice-" + name + " --image-out " + quote(img.string()),
                               work_dir() / ("synth_splice_" + name + ".json"));
        c.check(rc == 0, "synth splice-" + name);
        const auto r = run_cli_json("splice --image " + quote(img.string()) + " --cal 20", "splice_" + name);
        if (r["result"]["grade"] == name) {
            ++recovered;
        } else {
            misses += " " + name + "->" + r["result"]["grade"].get<std::string>();
        }
    }
    c.check(recovered >= 8, std::to_string(recovered) + "/8 contours recovered:" + misses);

    // Printed per-class counts: total and misclassified.
    const struct {
        splice::Grade g;
        int n, wrong;
        long pct;
    } printed[] = {{splice::Grade::A, 50, 0, 0},  {splice::Grade::B1, 6, 2, 33}, {splice::Grade::B2, 8, 0, 0},
                   {splice::Grade::C1, 4, 0, 0},  {splice::Grade::C2, 12, 0, 0}, {splice::Grade::D, 8, 1, 13},
                   {splice::Grade::E, 24, 0, 0},  {splice::Grade::F, 8, 0, 0}};
    std::vector<splice::Grade> truth;
    std::vector<splice::Grade> predicted;
    for (const auto& p : printed)
        for (int i = 0; i < p.n; ++i) {
            truth.push_back(p.g);
            predicted.push_back(i < p.wrong ? (p.g == splice::Grade::E ? splice::Grade::A : splice::Grade::E) : p.g);
        }
    const auto rep = splice::classification_report(predicted, truth);
    c.check(rep.rows.size() == 8, "report rows");
    std::string rows;
    for (std::size_t i = 0; i < rep.rows.size() && i < 8; ++i) {
        const auto& row = rep.rows[i];
        c.check(row.grade == printed[i].g && row.total == static_cast<std::size_t>(printed[i].n) &&
                    row.incorrect == static_cast<std::size_t>(printed[i].wrong) &&
                    std::lround(row.error_pct) == printed[i].pct,
                "row " + splice::to_string(row.grade) + " " + fmt(row.error_pct, 2) + "%");
        if (row.incorrect) rows += " " + splice::to_string(row.grade) + " " + std::to_string(std::lround(row.error_pct)) + "%";
    }
    c.check(rep.total == 120 && rep.correct == 117 && rep.incorrect == 3, "totals");
    return c.verdict(std::to_string(agree) + "/" + std::to_string(points) + " grid points, " +
                     std::to_string(reached.size()) + " grades, " + std::to_string(recovered) + "/8 contours, rows" +
                     rows);
}

Verdict criterion10() {
    Checker c;
    synth::CrossSectionSpec s;
    s.width = 128;
    s.height = 96;
    s.major = 100;
    s.minor = 60;
    const double cx = 63.5;
    const double cy = 47.5;
    // Non-overlapping disks at sub-pixel positions, each wholly inside the outline.
    std::mt19937 gen(10);
    std::uniform_real_distribution<double> ux(-50, 50);
    std::uniform_real_distribution<double> uy(-30, 30);
    std::uniform_int_distribution<int> ur(4, 7);
    for (int attempt = 0; attempt < 4000 && s.fibers.size() < 40; ++attempt) {
        const double r = ur(gen);
        const double dx = ux(gen);
        const double dy = uy(gen);
        const double a = s.major / 2 - r - 1.5;
        const double b = s.minor / 2 - r - 1.5;
        if ((dx / a) * (dx / a) + (dy / b) * (dy / b) > 1) continue;
        bool clear = true;
        for (const auto& d : s.fibers) clear = clear && std::hypot(d.cx - cx - dx, d.cy - cy - dy) > d.r + r + 1;
        if (clear) s.fibers.push_back({cx + dx, cy + dy, r});
    }
    const auto render = synth::render_cross_section(s);
    const auto ellipse = crosssection::fit_yarn_ellipse(render.yarn);
    const auto m = crosssection::packing_density(render.fibers, ellipse);
    double fiber_area = 0;
    for (const auto& d : s.fibers) fiber_area += M_PI * d.r * d.r;
    const double analytic = 100 * fiber_area / (M_PI * s.major * s.minor / 4);
    const double rel = std::abs(m.packing_density_pct - analytic) / analytic;
    c.check(rel <= 0.02, "relative error " + fmt(100 * rel, 2) + "%");

    const crosssection::Ellipse e{0, 0, 100, 60, 0};
    c.check(e.area() == M_PI * 100 * 60 / 4, "area() is not pi M N / 4");
    return c.verdict(std::to_string(s.fibers.size()) + " disks r 4..7: measured " + fmt(m.packing_density_pct, 3) +
                     "% vs analytic " + fmt(analytic, 3) + "% (" + fmt(100 * rel, 2) + "% rel), area exact");
}

Verdict criterion11() {
    Checker c;
    double worst_f = 0;
    double worst_angle = 0;
    double f_magic = 1;
    for (double theta : {0.0, 15.0, 30.0, 45.0, 54.7356, 60.0, 75.0}) {
        synth::FiberFieldSpec s;
        s.angle_deg = theta;
        const auto r = texture::analyze_texture(synth::render_fiber_field(s));
        const double rad = theta * M_PI / 180;
        const double want = 1 - 1.5 * std::sin(rad) * std::sin(rad);
        worst_f = std::max(worst_f, std::abs(r.orientation_index - want));
        worst_angle = std::max(worst_angle, std::abs(r.mean_angle_deg - theta));
        c.check(std::abs(r.orientation_index - want) <= 0.01, fmt(theta, 4) + " deg: F " + fmt(r.orientation_index, 4));
        c.check(std::abs(r.mean_angle_deg - theta) <= 1.3, fmt(theta, 4) + " deg: angle " + fmt(r.mean_angle_deg, 3));
        if (theta > 54 && theta < 55) {
            f_magic = r.orientation_index;
            c.check(std::abs(r.orientation_index) <= 1e-3, "F(54.7356) = " + fmt(r.orientation_index, 5));
        }
    }
    return c.verdict("worst |dF| " + fmt(worst_f, 4) + ", F(54.7356) " + fmt(f_magic, 5) + ", worst angle error " +
                     fmt(worst_angle, 3) + " deg");
}

Verdict criterion12() {
    Checker c;
    std::mt19937 gen(77);
    std::uniform_int_distribution<int> size(1, 90);
    std::uniform_int_distribution<int> lv(1, 4);
    int identical = 0;
    for (int i = 0; i < 100; ++i) {
        GrayImage img(size(gen), size(gen));
        for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(gen() & 0xff);
        const auto dec = grade::wavelet_decompose(img, lv(gen), grade::WaveletKind::Haar);
        if (grade::wavelet_reconstruct(dec) == img) ++identical;
    }
    c.check(identical == 100, std::to_string(identical) + "/100 round trips identical");

    synth::YarnRenderSpec s;
    s.width = 400;
    s.height = 96;
    s.core_width = 21;
    s.core_axis = 48;
    for (int i = 0; i < 10; ++i) s.hairs.push_back({20 + 37 * i, 4 + 2 * i, i % 2 ? synth::Side::Below : synth::Side::Above});
    const auto widths = metrology::width_profile(grade::separate_core(synth::render_hairy_yarn(s))).widths;
    int worst = 0;
    for (int w : widths) worst = std::max(worst, std::abs(w - s.core_width));
    c.check(worst <= 1, "core width off by " + std::to_string(worst) + " px");
    return c.verdict(std::to_string(identical) + "/100 Haar round trips, hairy core width 21 +/- " +
                     std::to_string(worst) + " px over " + std::to_string(widths.size()) + " columns");
}

Verdict criterion13() {
    Checker c;
    const auto d = work_dir();
    auto img = [&](const std::string& name) { return quote((d / (name + ".pgm")).string()); };
    const std::vector<std::pair<std::string, std::string>> presets{
        {"plain", "plain"},       {"diameter-0.15", "diam"}, {"twist", "twist"},         {"hairy", "hairy"},
        {"slub-table3", "slub"},  {"splice-B1", "splice"},   {"cross-section", "cross"}, {"fiber-field", "field"}};
    for (const auto& [preset, name] : presets) {
        c.check(run_cli("synth --preset " + preset + " --image-out " + img(name), d / (name + "_synth.json")) == 0,
                "synth " + preset);
    }
    {
        std::ofstream g(d / "groups.csv");
        g << "group,value\nring,38.1\nring,37.2\nring,39.0\ncompact,41.5\ncompact,42.8\ncompact,41.2\n"
             "vortex,23.0\nvortex,24.9\nvortex,23.6\n";
        std::ofstream m(d / "manifest.txt");
        for (auto g2 : splice::kAllGrades) {
            const std::string n = splice::to_string(g2);
            run_cli("synth --preset splice-" + n + " --image-out " + img("m_" + n), d / ("m_" + n + ".json"));
            m << "m_" << n << ".pgm cal=20 truth=" << n << "\n";
        }
    }
    const std::vector<std::pair<std::string, std::string>> runs{
        {"calibrate", "calibrate --pixels 34 --mm 0.5 --measure-px 10.2"},
        {"diameter", "diameter --image " + img("diam") + " --cal 68 --count 40 --count-system Ne1"},
        {"diameter_infl", "diameter --image " + img("plain") + " --cal 10 --mode inflection"},
        {"twist", "twist --image " + img("twist") + " --cal 10 --method both --diameter-mm 0.2"},
        {"hairiness", "hairiness --image " + img("hairy") + " --cal 10 --csv @hairiness.csv"},
        {"slub", "slub --image " + img("slub") + " --cal 10 --csv @slub.csv"},
        {"splice", "splice --image " + img("splice") + " --cal 20"},
        {"packing", "packing --image " + img("cross") + " --cal 10"},
        {"texture", "texture --image " + img("field") + " --csv @texture.csv"},
        {"grade", "grade --image " + img("slub") + " --cal 10 --csv @grade.csv"},
        {"stats_csv", "stats --csv " + quote((d / "groups.csv").string())},
        {"stats_means", "stats --means 38.01,41.91,23.86 --n 5 --ms-error 22.106"},
        {"batch", "batch --manifest " + quote((d / "manifest.txt").string()) +
                      " --command splice --workers 4 --summary @summary.csv"},
    };
    int identical = 0;
    for (const auto& [name, args] : runs) {
        std::vector<std::string> outputs[2];
        for (int rep = 0; rep < 2; ++rep) {
            std::string a = args;
            std::string side;
            const auto at = a.find('@');
            if (at != std::string::npos) {
                const auto end = a.find(' ', at);
                const std::string file = a.substr(at + 1, end == std::string::npos ? std::string::npos : end - at - 1);
                side = (d / (std::to_string(rep) + "_" + file)).string();
                a = a.substr(0, at) + quote(side) + (end == std::string::npos ? "" : a.substr(end));
            }
            const auto out = d / (std::to_string(rep) + "_" + name + ".out");
            const int rc = run_cli(a, out);
            c.check(rc == 0, name + " exited " + std::to_string(rc));
            outputs[rep].push_back(slurp(out));
            if (!side.empty()) outputs[rep].push_back(slurp(side));
        }
        const bool same = outputs[0] == outputs[1] && !outputs[0].front().empty();
        identical += same ? 1 : 0;
        c.check(same, name + " output differs between runs");
    }
    return c.verdict(std::to_string(identical) + "/" + std::to_string(runs.size()) +
                     " CLI runs byte-identical across repeats");
}

}  // namespace

int main() {
    const std::vector<std::function<Verdict()>> criteria{criterion1, criterion2,  criterion3,  criterion4, criterion5,
                                                         criterion6, criterion7,  criterion8,  criterion9, criterion10,
                                                         criterion11, criterion12, criterion13};
    const auto t0 = std::chrono::steady_clock::now();
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i]();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += v.pass ? 0 : 1;
        std::cout << "CRITERION " << i + 1 << ' ' << (v.pass ? "PASS" : "FAIL") << ": " << v.detail << std::endl;
    }
    std::cout << "total " << fmt(seconds_since(t0), 2) << " s, " << failures << " failed" << std::endl;
    std::error_code ec;
    fs::remove_all(work_dir(), ec);
    return failures == 0 ? 0 : 1;
}
