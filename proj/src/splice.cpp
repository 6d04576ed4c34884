#include "yarnscope/splice.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace yarnscope::splice {

std::string to_string(Grade g) {
    switch (g) {
        case Grade::A: return "A";
        case Grade::B1: return "B1";
        case Grade::B2: return "B2";
        case Grade::C1: return "C1";
        case Grade::C2: return "C2";
        case Grade::D: return "D";
        case Grade::E: return "E";
        case Grade::F: return "F";
    }
    return "?";
}

Grade parse_grade(const std::string& name) {
    for (Grade g : kAllGrades)
        if (to_string(g) == name) return g;
    throw ParameterError("unknown splice grade '" + name + "'");
}

OpeningMeasurement measure_opening(const BinaryImage& input, const metrology::Calibration& cal,
                                   const MeasureOptions& options) {
    if (!(options.departure > 0)) throw ParameterError("departure must be positive");
    const BinaryImage bin = options.orientation == Orientation::ParentRight ? flip_horizontal(input) : input;
    const auto widths = metrology::width_profile(bin).widths;
    std::vector<int> cols;
    for (int x = 0; x < static_cast<int>(widths.size()); ++x)
        if (widths[x] > 0) cols.push_back(x);
    if (cols.empty()) throw AnalysisError("no parent region");

    const int first = cols.front();
    const int last = cols.back();
    const int span = last - first + 1;
    const int head = std::min<int>(static_cast<int>(cols.size()), std::max(5, span / 10));
    std::vector<int> lead;
    for (int i = 0; i < head; ++i) lead.push_back(widths[cols[i]]);
    std::nth_element(lead.begin(), lead.begin() + head / 2, lead.end());
    const double y0 = lead[head / 2];

    int start = -1;
    for (int x = first; x <= last; ++x) {
        if (std::abs(widths[x] - y0) > options.departure * y0) {
            start = x;
            break;
        }
    }
    if (start < 0) throw AnalysisError("opening zone empty");
    if (start == first) throw AnalysisError("no parent region");

    std::map<int, int> hist;
    for (int x = first; x < start; ++x) ++hist[widths[x]];
    const int y_px = std::max_element(hist.begin(), hist.end(), [](const auto& a, const auto& b) {
                         return a.second < b.second;
                     })->first;

    OpeningMeasurement m;
    m.start_col = options.orientation == Orientation::ParentRight ? bin.width() - 1 - start : start;
    m.y_mm = cal.to_mm(y_px);
    m.l_mm = cal.to_mm(last - start + 1);
    double sum[3] = {0, 0, 0};
    int count[3] = {0, 0, 0};
    for (int x = start; x <= last; ++x) {
        const double offset_mm = cal.to_mm(x - start);
        const int zone = offset_mm < 5.0 ? 0 : (offset_mm < 10.0 ? 1 : 2);
        sum[zone] += widths[x];
        ++count[zone];
    }
    m.w1_mm = cal.to_mm(sum[0] / count[0]);
    if (m.l_mm > 5.0 && count[1] > 0) m.w2_mm = cal.to_mm(sum[1] / count[1]);
    if (m.l_mm > 10.0 && count[2] > 0) m.w3_mm = cal.to_mm(sum[2] / count[2]);
    return m;
}

BinaryImage preprocess_opening(const GrayImage& img, int median_window, int min_area) {
    const GrayImage smooth = median_window > 1 ? median_filter(img, median_window) : img;
    return fill_holes(remove_small_objects(otsu_binarize(smooth), min_area));
}

Grade classify_opening(const OpeningMeasurement& m, const Thresholds& t) {
    if (!(m.y_mm > 0)) throw AnalysisError("parent width must be positive");
    if (!(t.r_open > 1) || !(t.r_over > 0 && t.r_over < 1)) {
        throw ParameterError("thresholds need r_open > 1 and 0 < r_over < 1");
    }
    if (m.w1_mm <= m.y_mm) return Grade::D;
    if (m.l_mm < 5.0) return m.w1_mm / m.y_mm >= t.r_open ? Grade::C1 : Grade::C2;
    if (m.l_mm < 10.0) {
        if (!m.w2_mm) throw AnalysisError("W2 undefined for a 5-10 mm opening");
        const double r = *m.w2_mm / m.y_mm;
        if (r >= t.r_open) return Grade::B1;
        if (r >= 1.0) return Grade::B2;
        if (r >= t.r_over) return Grade::E;
        return Grade::F;
    }
    if (!m.w3_mm) throw AnalysisError("W3 undefined for an opening of 10 mm or more");
    return *m.w3_mm / m.y_mm >= 1.0 ? Grade::A : Grade::E;
}

ClassificationReport classification_report(const std::vector<Grade>& predicted, const std::vector<Grade>& truth) {
    if (predicted.size() != truth.size()) throw ParameterError("label sequences differ in length");
    std::map<Grade, ClassRow> rows;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        auto& row = rows[truth[i]];
        row.grade = truth[i];
        ++row.total;
        if (predicted[i] == truth[i]) {
            ++row.correct;
        } else {
            ++row.incorrect;
        }
    }
    ClassificationReport rep;
    double macro = 0;
    for (auto& [g, row] : rows) {
        row.error_pct = 100.0 * static_cast<double>(row.incorrect) / static_cast<double>(row.total);
        macro += row.error_pct;
        rep.total += row.total;
        rep.correct += row.correct;
        rep.incorrect += row.incorrect;
        rep.rows.push_back(row);
    }
    if (rep.total > 0) {
        rep.error_pct = 100.0 * static_cast<double>(rep.incorrect) / static_cast<double>(rep.total);
        rep.macro_error_pct = macro / static_cast<double>(rows.size());
    }
    return rep;
}

}  // namespace yarnscope::splice
