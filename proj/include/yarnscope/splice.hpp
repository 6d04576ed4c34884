#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "yarnscope/metrology.hpp"
#include "yarnscope/raster.hpp"

namespace yarnscope::splice {

enum class Grade { A, B1, B2, C1, C2, D, E, F };

inline constexpr std::array<Grade, 8> kAllGrades{Grade::A,  Grade::B1, Grade::B2, Grade::C1,
                                                 Grade::C2, Grade::D,  Grade::E,  Grade::F};

std::string to_string(Grade g);
Grade parse_grade(const std::string& name);

struct OpeningMeasurement {
    double y_mm = 0;   ///< parent yarn width
    double l_mm = 0;   ///< opening length from the start point
    double w1_mm = 0;  ///< mean width over [0, 5) mm
    std::optional<double> w2_mm;  ///< [5, 10) mm, only when L > 5 mm
    std::optional<double> w3_mm;  ///< [10, end] mm, only when L > 10 mm
    int start_col = 0;
};

enum class Orientation { ParentLeft, ParentRight };

struct MeasureOptions {
    Orientation orientation = Orientation::ParentLeft;
    double departure = 0.25;  ///< relative width change marking the start point
};

/// Expects a clean binary contour: parent yarn on one side, opening on the other.
OpeningMeasurement measure_opening(const BinaryImage& bin, const metrology::Calibration& cal,
                                   const MeasureOptions& options = {});

/// Gray input: median filter, Otsu, small-object removal, hole filling.
BinaryImage preprocess_opening(const GrayImage& img, int median_window = 3, int min_area = 50);

struct Thresholds {
    double r_open = 2.0;
    double r_over = 0.5;
};

Grade classify_opening(const OpeningMeasurement& m, const Thresholds& t = {});

struct ClassRow {
    Grade grade = Grade::A;
    std::size_t total = 0;
    std::size_t correct = 0;
    std::size_t incorrect = 0;
    double error_pct = 0;
};

struct ClassificationReport {
    std::vector<ClassRow> rows;  ///< grades present in the truth, in grade order
    std::size_t total = 0;
    std::size_t correct = 0;
    std::size_t incorrect = 0;
    double error_pct = 0;        ///< incorrect / total
    double macro_error_pct = 0;  ///< mean of the per-class errors
};

ClassificationReport classification_report(const std::vector<Grade>& predicted, const std::vector<Grade>& truth);

}  // namespace yarnscope::splice
