#include "yarnscope/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

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

#ifndef YARNSCOPE_VERSION
#define YARNSCOPE_VERSION "0.0.0"
#endif

namespace yarnscope::cli {

using json = nlohmann::json;

json default_config() {
    return json{
        {"calibration", {{"px_per_mm", 0.0}}},
        {"diameter", {{"mode", "binary"}, {"percentile", 0.5}, {"smoothing_radius", 1}, {"median_window", 1}}},
        {"twist",
         {{"method", "both"},
          {"core_fraction", 0.5},
          {"fft_pad_factor", 8},
          {"fft_dc_guard", 2},
          {"fft_min_peak_ratio", 50.0},
          {"lines_low_pass_radius", 1},
          {"lines_min_len_px", 10.0},
          {"lines_merge_angle_deg", 5.0},
          {"lines_merge_dist_px", 3.0},
          {"lines_bin_deg", 10.0},
          {"agreement_deg", 3.0}}},
        {"hairiness",
         {{"bin_width_mm", 0.25}, {"threshold_mm", 2.0}, {"split_mm", 0.75}, {"core_fraction", 0.5}}},
        {"slub",
         {{"amplitude_threshold_pct", 140.0},
          {"min_len_mm", 20.0},
          {"median_window", 5},
          {"period_tolerance", 0.1},
          {"min_area", 20},
          {"lane_valley_fraction", 0.02}}},
        {"splice",
         {{"r_open", 2.0},
          {"r_over", 0.5},
          {"departure", 0.25},
          {"median_window", 3},
          {"min_area", 50},
          {"orientation", "left"}}},
        {"packing", {{"ellipse_mode", "moments"}, {"remove_small", true}, {"min_area", 20}, {"fill_lumens", true}}},
        {"texture", {{"spur_len_px", 10}, {"neighborhood", 8}, {"min_trace_len_px", 15}, {"chord_px", 11}}},
        {"grade", {{"levels", 3}, {"wavelet", "haar"}, {"saliency_window", 101}, {"defect_threshold", 0.5}}},
    };
}

json merge_config(const json& base, const json& overrides) {
    if (!overrides.is_object()) throw ParameterError("config must be a JSON object");
    json merged = base;
    for (const auto& [section, values] : overrides.items()) {
        if (!base.contains(section)) throw ParameterError("unknown config section '" + section + "'");
        if (!values.is_object()) throw ParameterError("config section '" + section + "' must be an object");
        for (const auto& [key, value] : values.items()) {
            const auto& slot = base[section];
            if (!slot.contains(key)) throw ParameterError("unknown config key '" + section + "." + key + "'");
            const auto& def = slot[key];
            const bool ok = (def.is_number_float() && value.is_number()) ||
                            (def.is_number_integer() && value.is_number_integer()) ||
                            (def.is_boolean() && value.is_boolean()) || (def.is_string() && value.is_string());
            if (!ok) throw ParameterError("config key '" + section + "." + key + "' has the wrong type");
            merged[section][key] = def.is_number_float() ? json(value.get<double>()) : value;
        }
    }
    return merged;
}

namespace {

struct Outcome {
    int code = 0;
    std::string stdout_text;
    std::string out_path;  ///< empty: stdout
    std::string message;
    json report;
    bool has_report = false;
};

class Runner {
public:
    explicit Runner(std::istream& in) : in_(in) {}

    Outcome execute(const std::vector<std::string>& args);

private:
    // Shared options.
    std::string config_path_;
    std::vector<std::string> sets_;
    bool dump_config_ = false;
    std::string out_path_;
    std::string image_;
    double cal_ = 0;

    // Per-subcommand options.
    std::string mode_;
    std::optional<double> count_value_;
    std::string count_system_ = "tex";
    std::string method_;
    std::optional<double> diameter_mm_;
    std::string csv_path_;
    bool lanes_ = false;
    std::string orientation_;
    std::string ratios_;
    std::string yarn_mask_;
    int neighborhood_ = 0;
    std::string references_;
    std::string groups_csv_;
    std::vector<double> means_;
    int n_per_group_ = 0;
    double ms_error_ = -1;
    int df_error_ = 0;
    double pixels_ = 0;
    double mm_ = 0;
    std::optional<double> measure_px_;
    std::string preset_;
    std::string image_out_ = "-";
    std::string truth_path_;
    std::uint64_t seed_ = 1;
    int noise_ = 0;
    std::string manifest_;
    std::string command_;
    int workers_ = 1;
    std::string summary_path_;

    std::istream& in_;
    json config_;
    std::vector<std::string> warnings_;

    json load_config() const;
    GrayImage image() const;
    metrology::Calibration calibration(bool required = true) const;
    double cal_value() const;

    json cmd_calibrate();
    json cmd_diameter();
    json cmd_twist();
    json cmd_hairiness();
    json cmd_slub();
    json cmd_splice();
    json cmd_packing();
    json cmd_texture();
    json cmd_grade();
    json cmd_stats();
    Outcome cmd_synth();
    Outcome cmd_batch(const std::vector<std::string>& passthrough);
};

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError(ParseError::Kind::Io, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParseError(ParseError::Kind::Io, "cannot write '" + path + "'");
    f << text;
    if (!f) throw ParseError(ParseError::Kind::Io, "cannot write '" + path + "'");
}

json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(ParseError::Kind::Malformed, what + ": " + e.what());
    }
}

json parse_set_value(const std::string& raw) {
    try {
        return json::parse(raw);
    } catch (const json::parse_error&) {
        return json(raw);
    }
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (item.empty() || *end != '\0') throw ParameterError("not a number: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json f_value(const stats::AnovaTable& t) { return t.f ? json(*t.f) : json("infinite"); }

json anova_json(const stats::AnovaTable& t) {
    return {{"k", t.k()},
            {"n", t.n},
            {"means", t.means},
            {"ss_between", t.between.sum_of_squares},
            {"df_between", t.between.df},
            {"ms_between", t.between.mean_square},
            {"ss_error", t.error.sum_of_squares},
            {"df_error", t.error.df},
            {"ms_error", t.error.mean_square},
            {"ss_total", t.total.sum_of_squares},
            {"df_total", t.total.df},
            {"f", f_value(t)},
            {"p_value", t.p_value}};
}

json pairwise_json(const std::vector<stats::PairwiseDiff>& diffs) {
    json arr = json::array();
    for (const auto& d : diffs) {
        arr.push_back({{"i", d.i}, {"j", d.j}, {"mean_diff", d.diff}, {"se", d.se}, {"p_value", d.p_value}});
    }
    return arr;
}

json slub_json(const slub::SlubReport& rep, double tolerance) {
    json segs = json::array();
    for (const auto& s : rep.segments) {
        segs.push_back({{"start_mm", s.start_mm},
                        {"length_mm", s.length_mm},
                        {"mean_width_px", s.mean_width_px},
                        {"amplitude_pct", s.amplitude_pct}});
    }
    json period = nullptr;
    if (rep.segments.size() >= 3) {
        const auto p = slub::slub_period(rep, tolerance);
        period = p ? json(*p) : json("aperiodic");
    }
    return {{"base_width_px", rep.base_width_px},
            {"n_slubs", rep.segments.size()},
            {"segments", segs},
            {"distances_mm", rep.distances_mm},
            {"period_segments", period},
            {"scanned_length_mm", rep.scanned_length_mm},
            {"leading_margin_mm", rep.leading_margin_mm},
            {"trailing_margin_mm", rep.trailing_margin_mm}};
}

void flatten(const json& j, const std::string& prefix, std::map<std::string, json>& out) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
    } else if (!j.is_array()) {
        out[prefix] = j;
    }
}

std::string csv_field(const json& v) {
    if (v.is_null()) return "";
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return format_number(v.get<double>());
    const std::string s = v.is_string() ? v.get<std::string>() : v.dump();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

}  // namespace

json Runner::load_config() const {
    json cfg = default_config();
    std::string path = config_path_;
    if (path.empty()) {
        if (const char* env = std::getenv(kConfigEnv); env != nullptr && *env != '\0') path = env;
    }
    if (!path.empty()) cfg = merge_config(cfg, parse_json_text(read_text(path), "config '" + path + "'"));
    for (const auto& s : sets_) {
        const auto eq = s.find('=');
        const auto dot = s.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
            throw ParameterError("--set expects section.key=value, got '" + s + "'");
        }
        json patch;
        patch[s.substr(0, dot)][s.substr(dot + 1, eq - dot - 1)] = parse_set_value(s.substr(eq + 1));
        cfg = merge_config(cfg, patch);
    }
    return cfg;
}

GrayImage Runner::image() const {
    if (image_.empty()) throw ParameterError("--image is required");
    if (image_ == "-") return read_pgm(in_);
    return load_pgm(image_);
}

double Runner::cal_value() const { return cal_ > 0 ? cal_ : config_["calibration"]["px_per_mm"].get<double>(); }

metrology::Calibration Runner::calibration(bool required) const {
    const double v = cal_value();
    if (!(v > 0)) {
        if (required) throw ParameterError("calibration required: pass --cal PX_PER_MM");
        return metrology::Calibration(1.0);
    }
    return metrology::Calibration(v);
}

json Runner::cmd_calibrate() {
    const auto cal = metrology::calibrate(pixels_, mm_);
    json r{{"px_per_mm", cal.pixels_per_mm()}};
    if (measure_px_) {
        r["measured_px"] = *measure_px_;
        r["measured_mm"] = metrology::px_to_mm(cal, *measure_px_);
    }
    return r;
}

json Runner::cmd_diameter() {
    const auto& c = config_["diameter"];
    const std::string mode = mode_.empty() ? c["mode"].get<std::string>() : mode_;
    const auto cal = calibration();
    GrayImage img = image();
    const int mw = c["median_window"].get<int>();
    if (mw > 1) img = median_filter(img, mw);
    json r{{"mode", mode}};
    double mean_mm = 0;
    if (mode == "binary") {
        const auto s = metrology::mean_diameter(metrology::width_profile(otsu_binarize(img)), cal);
        mean_mm = s.mean_mm;
        r.update({{"mean_mm", s.mean_mm},
                  {"min_mm", s.min_mm},
                  {"max_mm", s.max_mm},
                  {"cv_pct", 100.0 * s.cv},
                  {"mean_px", s.mean_px},
                  {"n_columns", s.n_columns}});
    } else if (mode == "percentile" || mode == "inflection") {
        metrology::HistogramDiameterOptions o;
        o.mode = mode == "percentile" ? metrology::DiameterMode::Percentile : metrology::DiameterMode::Inflection;
        o.percentile = c["percentile"].get<double>();
        o.smoothing_radius = c["smoothing_radius"].get<int>();
        const double px = metrology::histogram_level_diameter(img, o);
        mean_mm = cal.to_mm(px);
        r.update({{"mean_mm", mean_mm}, {"mean_px", px}});
    } else {
        throw ParameterError("unknown diameter mode '" + mode + "' (binary, percentile, inflection)");
    }
    if (count_value_) {
        const metrology::YarnCount count{*count_value_, metrology::parse_count_system(count_system_)};
        const auto band = metrology::trommer_band(count);
        const bool inside = band.contains(mean_mm);
        r["count"] = {{"value", count.value},
                      {"system", metrology::to_string(count.system)},
                      {"tex", metrology::count_convert(count, metrology::CountSystem::Tex).value},
                      {"trommer_min_mm", band.min_mm},
                      {"trommer_max_mm", band.max_mm},
                      {"within_trommer_band", inside}};
        if (!inside) warnings_.push_back("mean diameter lies outside the expected band for the stated count");
    }
    return r;
}

json Runner::cmd_twist() {
    const auto& c = config_["twist"];
    const std::string method = method_.empty() ? c["method"].get<std::string>() : method_;
    if (method != "fft" && method != "lines" && method != "both") {
        throw ParameterError("unknown twist method '" + method + "' (fft, lines, both)");
    }
    const auto band = twist::extract_core(image(), c["core_fraction"].get<double>());
    twist::FftOptions fo;
    fo.pad_factor = c["fft_pad_factor"].get<int>();
    fo.dc_guard = c["fft_dc_guard"].get<int>();
    fo.min_peak_ratio = c["fft_min_peak_ratio"].get<double>();
    twist::LineOptions lo;
    lo.low_pass_radius = c["lines_low_pass_radius"].get<int>();
    lo.min_len = c["lines_min_len_px"].get<double>();
    lo.merge_angle_deg = c["lines_merge_angle_deg"].get<double>();
    lo.merge_dist_px = c["lines_merge_dist_px"].get<double>();
    lo.bin_deg = c["lines_bin_deg"].get<double>();

    json r{{"method", method}, {"core_top_px", band.top}, {"core_bottom_px", band.bottom}};
    std::optional<twist::AngleEstimate> fft;
    std::optional<twist::AngleEstimate> lines;
    if (method != "lines") fft = twist::dominant_angle_fft(band.core, fo);
    if (method != "fft") lines = twist::dominant_angle_lines(band.core, lo);
    const auto& primary = fft ? *fft : *lines;
    r["angle_deg"] = primary.angle_deg;
    r["direction"] = twist::to_string(primary.direction);
    r["n_segments"] = lines ? json(lines->n_segments) : json(nullptr);
    if (fft && lines) {
        r["fft_angle_deg"] = fft->angle_deg;
        r["lines_angle_deg"] = lines->angle_deg;
        if (std::abs(fft->angle_deg - lines->angle_deg) > c["agreement_deg"].get<double>()) {
            warnings_.push_back("fft and line estimates disagree");
        }
    }
    r["tpm"] = diameter_mm_ ? json(twist::angle_to_tpm(primary.angle_deg, *diameter_mm_)) : json(nullptr);
    if (diameter_mm_) r["diameter_mm"] = *diameter_mm_;
    return r;
}

json Runner::cmd_hairiness() {
    const auto& c = config_["hairiness"];
    const auto cal = calibration();
    const GrayImage img = image();
    const auto band = twist::extract_core(img, c["core_fraction"].get<double>());
    const BinaryImage bin = otsu_binarize(img);
    const hairiness::CoreRows core{band.top, band.bottom};
    const auto hairs = hairiness::trace_hairs(bin, core);
    const auto h = hairiness::compute_hddp(bin, cal, core, c["bin_width_mm"].get<double>());
    const double threshold = c["threshold_mm"].get<double>();
    const auto fits = hairiness::fit_hddp_loglinear(h, c["split_mm"].get<double>());
    auto fit_json = [&](const hairiness::SegmentFit& s, const char* name) -> json {
        if (!s.fit) {
            warnings_.push_back(std::string(name) + " fit: " + s.error);
            return {{"error", s.error}};
        }
        return {{"m", s.fit->m}, {"b", s.fit->b}, {"r2", s.fit->r2}, {"n_points", s.fit->n_points},
                {"n_zero_bins_excluded", s.fit->n_excluded}};
    };
    json profile = json::array();
    for (std::size_t i = 0; i < h.size(); ++i) {
        profile.push_back({{"length_mm", h.bin_center(i)}, {"density_per_mm", h.density[i]}});
    }
    if (!csv_path_.empty()) {
        std::ostringstream csv;
        csv << "length_mm,density_per_mm\n";
        for (std::size_t i = 0; i < h.size(); ++i) {
            csv << format_number(h.bin_center(i)) << ',' << format_number(h.density[i]) << '\n';
        }
        write_text(csv_path_, csv.str());
    }
    return {{"core_top_px", band.top},
            {"core_bottom_px", band.bottom},
            {"n_hairs", hairs.size()},
            {"scan_length_mm", h.scan_length_mm},
            {"bin_width_mm", h.bin_width_mm},
            {"threshold_mm", threshold},
            {"hairs_ge_threshold_per_mm", hairiness::hairiness_count_ge(h, threshold)},
            {"fit_short", fit_json(fits.short_hairs, "short-hair")},
            {"fit_long", fit_json(fits.long_hairs, "long-hair")},
            {"hddp", profile}};
}

json Runner::cmd_slub() {
    const auto& c = config_["slub"];
    const auto cal = calibration();
    const BinaryImage bin = remove_small_objects(otsu_binarize(image()), c["min_area"].get<int>());
    slub::SlubOptions o;
    o.amplitude_threshold_pct = c["amplitude_threshold_pct"].get<double>();
    o.min_len_mm = c["min_len_mm"].get<double>();
    o.median_window = c["median_window"].get<int>();
    const double tol = c["period_tolerance"].get<double>();

    std::vector<std::pair<int, int>> lanes{{0, bin.height() - 1}};
    if (lanes_) lanes = slub::split_lanes(bin, c["lane_valley_fraction"].get<double>());
    if (lanes.empty()) throw AnalysisError("no yarn found");
    json reports = json::array();
    std::ostringstream csv;
    csv << "lane,width_px,count\n";
    for (std::size_t i = 0; i < lanes.size(); ++i) {
        const auto [y0, y1] = lanes[i];
        const auto profile = metrology::width_profile(crop(bin, 0, y0, bin.width(), y1 - y0 + 1));
        json rep = slub_json(slub::detect_slubs(profile, cal, o), tol);
        rep["lane_rows_px"] = {y0, y1};
        reports.push_back(rep);
        std::map<int, std::size_t> hist;
        for (int w : profile.widths) ++hist[w];
        for (const auto& [w, n] : hist) csv << i << ',' << w << ',' << n << '\n';
    }
    if (!csv_path_.empty()) write_text(csv_path_, csv.str());
    if (!lanes_) return reports[0];
    return {{"n_lanes", lanes.size()}, {"lanes", reports}};
}

json Runner::cmd_splice() {
    const auto& c = config_["splice"];
    const auto cal = calibration();
    splice::MeasureOptions mo;
    const std::string orient = orientation_.empty() ? c["orientation"].get<std::string>() : orientation_;
    if (orient == "left") {
        mo.orientation = splice::Orientation::ParentLeft;
    } else if (orient == "right") {
        mo.orientation = splice::Orientation::ParentRight;
    } else {
        throw ParameterError("orientation must be left or right");
    }
    mo.departure = c["departure"].get<double>();
    splice::Thresholds t{c["r_open"].get<double>(), c["r_over"].get<double>()};
    if (!ratios_.empty()) {
        const auto v = parse_number_list(ratios_);
        if (v.size() != 2) throw ParameterError("--ratios expects r_open,r_over");
        t = {v[0], v[1]};
    }
    const BinaryImage bin =
        splice::preprocess_opening(image(), c["median_window"].get<int>(), c["min_area"].get<int>());
    const auto m = splice::measure_opening(bin, cal, mo);
    return {{"Y_mm", m.y_mm},
            {"L_mm", m.l_mm},
            {"W1_mm", m.w1_mm},
            {"W2_mm", optional_number(m.w2_mm)},
            {"W3_mm", optional_number(m.w3_mm)},
            {"start_col_px", m.start_col},
            {"r_open", t.r_open},
            {"r_over", t.r_over},
            {"grade", splice::to_string(splice::classify_opening(m, t))}};
}

json Runner::cmd_packing() {
    const auto& c = config_["packing"];
    crosssection::PretreatOptions po;
    po.remove_small = c["remove_small"].get<bool>();
    po.min_area = c["min_area"].get<int>();
    po.fill_lumens = c["fill_lumens"].get<bool>();
    const std::string mode = mode_.empty() ? c["ellipse_mode"].get<std::string>() : mode_;
    crosssection::EllipseMode em;
    if (mode == "moments") {
        em = crosssection::EllipseMode::Moments;
    } else if (mode == "bbox") {
        em = crosssection::EllipseMode::BoundingBox;
    } else {
        throw ParameterError("ellipse mode must be moments or bbox");
    }
    const BinaryImage fibers = crosssection::pretreat(image(), po);
    BinaryImage yarn = fibers;
    if (!yarn_mask_.empty()) yarn = fill_holes(otsu_binarize(load_pgm(yarn_mask_)));
    const auto e = crosssection::fit_yarn_ellipse(yarn, em);
    const auto m = crosssection::packing_density(fibers, e);
    json r{{"ellipse_mode", mode},
           {"M_px", e.major},
           {"N_px", e.minor},
           {"center_x_px", e.cx},
           {"center_y_px", e.cy},
           {"orientation_deg", e.orientation_deg},
           {"fiber_area_px", m.fiber_area_px},
           {"yarn_area_px", m.yarn_area_px},
           {"density_pct", m.packing_density_pct}};
    if (cal_value() > 0) {
        const auto cal = calibration();
        r["M_mm"] = cal.to_mm(e.major);
        r["N_mm"] = cal.to_mm(e.minor);
    }
    return r;
}

json Runner::cmd_texture() {
    const auto& c = config_["texture"];
    texture::TextureOptions o;
    o.spur_len = c["spur_len_px"].get<int>();
    const int nb = neighborhood_ ? neighborhood_ : c["neighborhood"].get<int>();
    if (nb != 4 && nb != 8) throw ParameterError("neighborhood must be 4 or 8");
    o.neighborhood = nb == 4 ? Connectivity::Four : Connectivity::Eight;
    o.min_trace_len = c["min_trace_len_px"].get<int>();
    o.chord = c["chord_px"].get<int>();
    const BinaryImage skel = texture::corrective_procedure(skeletonize(otsu_binarize(image())), o.spur_len);
    const auto traces = texture::trace_fibers(skel, o.neighborhood, o.min_trace_len, o.chord);
    const auto r = texture::orientation_stats(traces);
    if (!csv_path_.empty()) {
        std::ostringstream csv;
        csv << "trace,length_px,angle_deg\n";
        for (std::size_t i = 0; i < traces.size(); ++i) {
            csv << i << ',' << format_number(traces[i].length) << ',' << format_number(traces[i].angle_deg) << '\n';
        }
        write_text(csv_path_, csv.str());
    }
    return {{"mean_angle_deg", r.mean_angle_deg},
            {"cv_pct", r.cv_pct},
            {"orientation_index", r.orientation_index},
            {"n_traces", r.n_traces},
            {"neighborhood", nb}};
}

json Runner::cmd_grade() {
    const auto& c = config_["grade"];
    const auto cal = calibration();
    grade::GradeOptions o;
    o.levels = c["levels"].get<int>();
    o.kind = grade::parse_wavelet(c["wavelet"].get<std::string>());
    o.saliency_window = c["saliency_window"].get<int>();
    o.defect_threshold = c["defect_threshold"].get<double>();
    const auto f = grade::extract_grade_features(image(), cal, o);
    json defects = json::array();
    for (const auto& d : f.defects) {
        defects.push_back({{"first_col_px", d.first_col},
                           {"last_col_px", d.last_col},
                           {"center_col_px", d.center_col},
                           {"peak_saliency", d.peak_saliency}});
    }
    const auto& s = f.summary;
    json r{{"wavelet", grade::to_string(o.kind)},
           {"levels", o.levels},
           {"mean_width_px", s.mean_width_px},
           {"mean_width_mm", s.mean_width_mm},
           {"cv_pct", s.cv_pct},
           {"defect_count", s.defect_count},
           {"defects_per_m", s.defects_per_m},
           {"saliency_p95", s.saliency_p95},
           {"defects", defects}};
    if (!references_.empty()) {
        const json refs = parse_json_text(read_text(references_), "references '" + references_ + "'");
        if (!refs.is_array()) throw ParseError(ParseError::Kind::Malformed, "references must be a JSON array");
        std::vector<grade::GradeReference> list;
        for (const auto& item : refs) {
            static const std::vector<std::string> keys{"label", "cv_pct", "defects_per_m", "saliency_p95"};
            if (!item.is_object()) throw ParseError(ParseError::Kind::Malformed, "reference entries must be objects");
            for (const auto& [k, v] : item.items()) {
                if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
                    throw ParseError(ParseError::Kind::Malformed, "unknown reference key '" + k + "'");
                }
            }
            try {
                list.push_back({item.at("label").get<std::string>(), item.at("cv_pct").get<double>(),
                                item.at("defects_per_m").get<double>(), item.at("saliency_p95").get<double>()});
            } catch (const json::exception& e) {
                throw ParseError(ParseError::Kind::Malformed, std::string("reference entry: ") + e.what());
            }
        }
        const auto decision = grade::classify_grade(s, list);
        json dist = json::object();
        for (const auto& [label, d] : decision.distances) dist[label] = d;
        r["grade"] = decision.label;
        r["distances"] = dist;
    }
    if (!csv_path_.empty()) {
        std::ostringstream csv;
        csv << "column,width_px,saliency\n";
        for (std::size_t i = 0; i < f.width_map.size(); ++i) {
            csv << i << ',' << f.width_map[i] << ',' << format_number(f.saliency[i]) << '\n';
        }
        write_text(csv_path_, csv.str());
    }
    return r;
}

json Runner::cmd_stats() {
    if (!groups_csv_.empty()) {
        std::map<std::string, std::vector<double>> by_name;
        std::vector<std::string> order;
        std::istringstream lines(read_text(groups_csv_));
        std::string line;
        int line_no = 0;
        while (std::getline(lines, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos) {
                throw ParseError(ParseError::Kind::Malformed, "line " + std::to_string(line_no) + ": expected group,value");
            }
            const std::string name = line.substr(0, comma);
            const std::string value = line.substr(comma + 1);
            char* end = nullptr;
            const double v = std::strtod(value.c_str(), &end);
            if (value.empty() || *end != '\0') {
                if (line_no == 1) continue;  // header row
                throw ParseError(ParseError::Kind::Malformed, "line " + std::to_string(line_no) + ": bad value");
            }
            if (!by_name.count(name)) order.push_back(name);
            by_name[name].push_back(v);
        }
        stats::Groups groups;
        for (const auto& n : order) groups.push_back(by_name[n]);
        const auto cmp = crosssection::compare_systems(groups);
        return {{"groups", order}, {"anova", anova_json(cmp.anova)}, {"pairwise", pairwise_json(cmp.pairwise)}};
    }
    if (means_.empty()) throw ParameterError("stats needs --csv or --means");
    if (n_per_group_ < 1 || ms_error_ < 0) throw ParameterError("--means requires --n and --ms-error");
    const std::vector<std::size_t> ns(means_.size(), static_cast<std::size_t>(n_per_group_));
    const int df = df_error_ > 0 ? df_error_ : static_cast<int>(means_.size()) * (n_per_group_ - 1);
    return {{"ms_error", ms_error_},
            {"df_error", df},
            {"pairwise", pairwise_json(stats::pairwise_mean_diff(means_, ns, ms_error_, df))}};
}

Outcome Runner::cmd_synth() {
    using namespace synth;
    json truth{{"preset", preset_}};
    GrayImage img(1, 1);
    auto apply_noise = [&](YarnRenderSpec& s) {
        s.seed = seed_;
        s.noise_amplitude = noise_;
    };
    if (preset_ == "plain") {
        YarnRenderSpec s;
        apply_noise(s);
        img = render_plain_yarn(s);
        truth["spec"] = s;
    } else if (preset_ == "diameter-0.15") {
        // 10.2 px mean width: every fifth column one pixel wider.
        YarnRenderSpec s;
        s.width = 250;
        s.core_width = 10;
        for (int x = 0; x < s.width; x += 5) s.slubs.push_back({x, 1, 11});
        apply_noise(s);
        img = render_slub_yarn(s);
        truth["spec"] = s;
        truth["px_per_mm"] = 68;
        truth["mean_width_px"] = 10.2;
        truth["mean_mm"] = 0.15;
    } else if (preset_ == "twist") {
        YarnRenderSpec s;
        s.height = 96;
        s.core_width = 48;
        s.core_axis = 48;
        s.twist_angle_deg = 30;
        apply_noise(s);
        img = render_twist_stripes(s);
        truth["spec"] = s;
        truth["direction"] = s.stripe_sign < 0 ? "Z" : "S";
    } else if (preset_ == "hairy") {
        YarnRenderSpec s;
        s.width = 400;
        s.height = 96;
        s.core_width = 21;
        s.core_axis = 48;
        for (int i = 0; i < 10; ++i) {
            s.hairs.push_back({20 + 37 * i, 4 + 2 * i, i % 2 ? Side::Below : Side::Above});
        }
        apply_noise(s);
        img = render_hairy_yarn(s);
        truth["spec"] = s;
        truth["px_per_mm"] = 10;
    } else if (preset_ == "slub-table3") {
        YarnRenderSpec s;
        s.width = 3400;
        s.height = 64;
        s.core_width = 10;
        s.core_axis = 32;
        int x = 200;
        const int pattern[4][2] = {{300, 400}, {500, 600}, {300, 400}, {500, 0}};
        for (const auto& p : pattern) {
            s.slubs.push_back({x, p[0], 25});
            x += p[0] + p[1];
        }
        apply_noise(s);
        img = render_slub_yarn(s);
        truth["spec"] = s;
        truth["px_per_mm"] = 10;
        truth["slub_lengths_mm"] = {30, 50, 30, 50};
        truth["distances_mm"] = {40, 60, 40};
        truth["amplitude_pct"] = 250;
        truth["period_segments"] = 2;
    } else if (preset_.rfind("splice-", 0) == 0) {
        const auto g = splice::parse_grade(preset_.substr(7));
        OpeningShapeSpec s;
        switch (g) {
            case splice::Grade::A: break;
            case splice::Grade::E: s.w3 = 6; break;
            case splice::Grade::B1: s.opening_length = 160; break;
            case splice::Grade::B2: s.opening_length = 160; s.w2 = 12; break;
            case splice::Grade::F: s.opening_length = 160; s.w2 = 2; break;
            case splice::Grade::C1: s.opening_length = 60; s.w1 = 20; break;
            case splice::Grade::C2: s.opening_length = 60; s.w1 = 12; break;
            case splice::Grade::D: s.opening_length = 60; s.w1 = 4; break;
        }
        img = to_gray(render_opening_contour(s));
        truth["spec"] = s;
        truth["grade"] = splice::to_string(g);
        truth["px_per_mm"] = s.px_per_mm;
    } else if (preset_ == "cross-section") {
        CrossSectionSpec s;
        for (int y = -26; y <= 26; y += 9)
            for (int x = -45; x <= 45; x += 9) {
                const double dx = x + ((y / 9) % 2 ? 4.5 : 0.0);
                if ((dx / 50) * (dx / 50) + (y / 30.0) * (y / 30.0) <= 0.85) s.fibers.push_back({63.5 + dx, 47.5 + y, 4});
            }
        const auto r = render_cross_section(s);
        img = to_gray(r.fibers);
        truth["spec"] = s;
    } else if (preset_ == "fiber-field") {
        FiberFieldSpec s;
        img = render_fiber_field(s);
        truth["spec"] = s;
    } else {
        throw ParameterError("unknown preset '" + preset_ +
                             "' (plain, diameter-0.15, twist, hairy, slub-table3, splice-<grade>, cross-section, "
                             "fiber-field)");
    }
    Outcome o;
    if (!truth_path_.empty()) write_text(truth_path_, truth.dump(2) + "\n");
    if (image_out_ == "-") {
        std::ostringstream pgm;
        write_pgm(pgm, img);
        o.stdout_text = pgm.str();
        return o;
    }
    save_pgm(img, image_out_);
    o.report = {{"image", image_out_}, {"width_px", img.width()}, {"height_px", img.height()}, {"truth", truth}};
    o.has_report = true;
    return o;
}

Outcome Runner::cmd_batch(const std::vector<std::string>& passthrough) {
    static const std::vector<std::string> direct{"cal",         "mode",   "method",     "orientation", "ratios",
                                                 "diameter-mm", "neighborhood", "references", "count",
                                                 "count-system"};
    if (command_.empty()) throw ParameterError("--command is required");
    if (command_ == "batch" || command_ == "synth") throw ParameterError("batch cannot run '" + command_ + "'");
    if (workers_ < 1) throw ParameterError("--workers must be >= 1");
    std::istringstream lines(read_text(manifest_));
    struct Row {
        std::string path;
        std::vector<std::string> args;
        std::string truth;
    };
    std::vector<Row> rows;
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto toks = split_ws(line);
        if (toks.empty() || toks[0][0] == '#') continue;
        std::filesystem::path path = toks[0];
        if (path.is_relative()) path = std::filesystem::path(manifest_).parent_path() / path;
        Row row{toks[0], {command_, "--image", path.string()}};
        for (std::size_t i = 1; i < toks.size(); ++i) {
            const auto eq = toks[i].find('=');
            if (eq == std::string::npos || eq == 0) {
                throw ParseError(ParseError::Kind::Malformed, "manifest token '" + toks[i] + "' is not key=value");
            }
            const std::string key = toks[i].substr(0, eq);
            if (key == "truth") {
                row.truth = toks[i].substr(eq + 1);
            } else if (std::find(direct.begin(), direct.end(), key) != direct.end()) {
                row.args.push_back("--" + key);
                row.args.push_back(toks[i].substr(eq + 1));
            } else {
                row.args.push_back("--set");
                row.args.push_back(toks[i]);
            }
        }
        row.args.insert(row.args.end(), passthrough.begin(), passthrough.end());
        rows.push_back(std::move(row));
    }

    std::vector<Outcome> results(rows.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        std::istringstream no_stdin;
        for (std::size_t i = next++; i < rows.size(); i = next++) {
            Runner r(no_stdin);
            results[i] = r.execute(rows[i].args);
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min<int>(workers_, std::max<int>(1, static_cast<int>(rows.size())));
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::vector<std::map<std::string, json>> flat(rows.size());
    std::vector<std::string> columns;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (results[i].has_report) flatten(results[i].report["result"], "", flat[i]);
        for (const auto& [k, v] : flat[i]) columns.push_back(k);
    }
    std::sort(columns.begin(), columns.end());
    columns.erase(std::unique(columns.begin(), columns.end()), columns.end());

    std::ostringstream csv;
    csv << "row,path,status,exit_code,message";
    for (const auto& c : columns) csv << ',' << csv_field(c);
    csv << '\n';
    std::size_t failures = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const bool ok = results[i].code == 0;
        failures += ok ? 0 : 1;
        csv << i << ',' << csv_field(rows[i].path) << ',' << (ok ? "ok" : "error") << ',' << results[i].code << ','
            << csv_field(results[i].message);
        for (const auto& c : columns) {
            const auto it = flat[i].find(c);
            csv << ',' << (it == flat[i].end() ? "" : csv_field(it->second));
        }
        csv << '\n';
    }
    if (!summary_path_.empty()) {
        if (command_ != "splice") throw ParameterError("--summary needs --command splice");
        std::vector<splice::Grade> predicted;
        std::vector<splice::Grade> truth;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto it = flat[i].find("grade");
            if (rows[i].truth.empty() || it == flat[i].end()) continue;
            truth.push_back(splice::parse_grade(rows[i].truth));
            predicted.push_back(splice::parse_grade(it->second.get<std::string>()));
        }
        const auto rep = splice::classification_report(predicted, truth);
        std::ostringstream sum;
        sum << "grade,n,correct,incorrect,error_pct\n";
        for (const auto& r : rep.rows) {
            sum << splice::to_string(r.grade) << ',' << r.total << ',' << r.correct << ',' << r.incorrect << ','
                << format_number(r.error_pct) << '\n';
        }
        sum << "Total," << rep.total << ',' << rep.correct << ',' << rep.incorrect << ','
            << format_number(rep.error_pct) << '\n';
        sum << "Macro,,,," << format_number(rep.macro_error_pct) << '\n';
        write_text(summary_path_, sum.str());
    }

    Outcome o;
    o.stdout_text = csv.str();
    o.message = std::to_string(rows.size()) + " rows, " + std::to_string(failures) + " failed";
    return o;
}

Outcome Runner::execute(const std::vector<std::string>& args) {
    CLI::App app{"yarnscope: yarn image metrology", "yarnscope"};
    app.set_version_flag("--version", YARNSCOPE_VERSION);
    app.require_subcommand(0, 1);
    app.fallthrough();
    app.add_option("--config", config_path_, "JSON config file (default: $YARNSCOPE_CONFIG)");
    app.add_option("--set", sets_, "Override a config value: section.key=value")
        ->expected(1)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    app.add_flag("--dump-config", dump_config_, "Print the effective config and exit");
    app.add_option("--out", out_path_, "Write the report to a file instead of stdout");

    auto image_opt = [&](CLI::App* s) { s->add_option("--image", image_, "Binary PGM (P5, maxval 255); '-' for stdin"); };
    auto cal_opt = [&](CLI::App* s) { s->add_option("--cal", cal_, "Pixels per millimetre"); };
    auto csv_opt = [&](CLI::App* s, const char* what) { s->add_option("--csv", csv_path_, what); };

    auto* calibrate = app.add_subcommand("calibrate", "Pixel scale from a reference length");
    calibrate->add_option("--pixels", pixels_, "Reference length in pixels")->required();
    calibrate->add_option("--mm", mm_, "Reference length in millimetres")->required();
    calibrate->add_option("--measure-px", measure_px_, "Convert this pixel length to mm");

    auto* diameter = app.add_subcommand("diameter", "Mean yarn diameter");
    image_opt(diameter);
    cal_opt(diameter);
    diameter->add_option("--mode", mode_, "binary | percentile | inflection");
    diameter->add_option("--count", count_value_, "Nominal yarn count for the band check");
    diameter->add_option("--count-system", count_system_, "tex | Nm | Ne1");

    auto* tw = app.add_subcommand("twist", "Surface twist angle and turns per metre");
    image_opt(tw);
    cal_opt(tw);
    tw->add_option("--method", method_, "fft | lines | both");
    tw->add_option("--diameter-mm", diameter_mm_, "Yarn diameter for the tpm conversion");

    auto* hair = app.add_subcommand("hairiness", "Hair density distribution profile");
    image_opt(hair);
    cal_opt(hair);
    csv_opt(hair, "Write the profile as length_mm,density_per_mm");

    auto* sl = app.add_subcommand("slub", "Slub length, amplitude, spacing and period");
    image_opt(sl);
    cal_opt(sl);
    sl->add_flag("--lanes", lanes_, "Split the image into strands first");
    csv_opt(sl, "Write the width histogram");

    auto* sp = app.add_subcommand("splice", "Splice opening geometry and grade");
    image_opt(sp);
    cal_opt(sp);
    sp->add_option("--orientation", orientation_, "left | right: side of the parent yarn");
    sp->add_option("--ratios", ratios_, "r_open,r_over");

    auto* pk = app.add_subcommand("packing", "Cross-section packing density");
    image_opt(pk);
    cal_opt(pk);
    pk->add_option("--mode", mode_, "moments | bbox");
    pk->add_option("--yarn-mask", yarn_mask_, "Separate PGM of the yarn outline");

    auto* tx = app.add_subcommand("texture", "Filament inclination and orientation index");
    image_opt(tx);
    tx->add_option("--neighborhood", neighborhood_, "4 | 8");
    csv_opt(tx, "Write per-trace length and angle");

    auto* gr = app.add_subcommand("grade", "Appearance-grade features");
    image_opt(gr);
    cal_opt(gr);
    gr->add_option("--references", references_, "JSON array of labelled reference summaries");
    csv_opt(gr, "Write width map and saliency per column");

    auto* st = app.add_subcommand("stats", "One-way ANOVA and pairwise mean differences");
    st->add_option("--csv", groups_csv_, "Rows of group,value");
    st->add_option("--means", means_, "Group means")->delimiter(',');
    st->add_option("--n", n_per_group_, "Observations per group");
    st->add_option("--ms-error", ms_error_, "Mean square error");
    st->add_option("--df-error", df_error_, "Error degrees of freedom (default k(n-1))");

    auto* sy = app.add_subcommand("synth", "Render a synthetic test image");
    sy->add_option("--preset", preset_, "plain | diameter-0.15 | twist | hairy | slub-table3 | splice-<grade> | "
                                        "cross-section | fiber-field")
        ->required();
    sy->add_option("--image-out", image_out_, "PGM output path; '-' for stdout");
    sy->add_option("--truth", truth_path_, "Write the ground truth JSON here");
    sy->add_option("--seed", seed_, "Noise seed");
    sy->add_option("--noise", noise_, "Additive noise amplitude");

    auto* batch = app.add_subcommand("batch", "Run one subcommand over a manifest, CSV out");
    batch->add_option("--manifest", manifest_, "Lines of: path [key=value ...]")->required();
    batch->add_option("--command", command_, "Subcommand to run per row")->required();
    batch->add_option("--workers", workers_, "Parallel workers");
    batch->add_option("--summary", summary_path_, "Splice only: per-grade confusion CSV from truth= labels");

    Outcome o;
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        o.stdout_text = app.help();
        return o;
    } catch (const CLI::CallForAllHelp&) {
        o.stdout_text = app.help("", CLI::AppFormatMode::All);
        return o;
    } catch (const CLI::CallForVersion&) {
        o.stdout_text = std::string(YARNSCOPE_VERSION) + "\n";
        return o;
    } catch (const CLI::ParseError& e) {
        o.code = 2;
        o.message = std::string(e.what()) + "\n" + app.help();
        return o;
    }

    CLI::App* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
    try {
        config_ = load_config();
        if (dump_config_) {
            o.stdout_text = config_.dump(2) + "\n";
            return o;
        }
        if (sub == nullptr) {
            o.code = 2;
            o.message = "a subcommand is required\n" + app.help();
            return o;
        }
        const std::string name = sub->get_name();
        if (name == "synth") return cmd_synth();
        if (name == "batch") {
            std::vector<std::string> passthrough;
            if (!config_path_.empty()) passthrough.insert(passthrough.end(), {"--config", config_path_});
            for (const auto& s : sets_) passthrough.insert(passthrough.end(), {"--set", s});
            o = cmd_batch(passthrough);
            o.out_path = out_path_;
            return o;
        }
        json result;
        if (name == "calibrate") result = cmd_calibrate();
        if (name == "diameter") result = cmd_diameter();
        if (name == "twist") result = cmd_twist();
        if (name == "hairiness") result = cmd_hairiness();
        if (name == "slub") result = cmd_slub();
        if (name == "splice") result = cmd_splice();
        if (name == "packing") result = cmd_packing();
        if (name == "texture") result = cmd_texture();
        if (name == "grade") result = cmd_grade();
        if (name == "stats") result = cmd_stats();
        const double cal = cal_value();
        o.report = {{"schema", kReportSchema},
                    {"tool_version", YARNSCOPE_VERSION},
                    {"subcommand", name},
                    {"input", image_.empty() ? json(nullptr) : json(image_)},
                    {"calibration", cal > 0 ? json{{"px_per_mm", cal}} : json(nullptr)},
                    {"result", result},
                    {"warnings", warnings_}};
        o.has_report = true;
        o.out_path = out_path_;
    } catch (const AnalysisError& e) {
        o.code = 3;
        o.message = e.what();
    } catch (const ParseError& e) {
        o.code = 2;
        o.message = e.what();
    } catch (const ParameterError& e) {
        o.code = 2;
        o.message = e.what();
    } catch (const json::exception& e) {
        o.code = 2;
        o.message = e.what();
    }
    return o;
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    Runner runner(in);
    Outcome o = runner.execute(args);
    std::string text = o.stdout_text;
    if (o.has_report) text = o.report.dump(2) + "\n";
    if (!o.message.empty()) err << o.message << (o.message.back() == '\n' ? "" : "\n");
    if (o.code != 0) return o.code;
    if (!o.out_path.empty()) {
        try {
            write_text(o.out_path, text);
        } catch (const ParseError& e) {
            err << e.what() << '\n';
            return 2;
        }
    } else {
        out << text;
        out.flush();
    }
    return 0;
}

int main(int argc, char** argv) {
    std::ios::sync_with_stdio(false);
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cin, std::cout, std::cerr);
}

}  // namespace yarnscope::cli
