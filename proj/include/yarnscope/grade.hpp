#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "yarnscope/metrology.hpp"
#include "yarnscope/raster.hpp"

namespace yarnscope::grade {

struct CoeffTag {};
using CoeffImage = Raster<std::int32_t, CoeffTag>;

enum class WaveletKind { Haar, LeGall53 };

std::string to_string(WaveletKind kind);
WaveletKind parse_wavelet(const std::string& name);

/// Integer lifting coefficients in the usual nested layout: after each level
/// the low-low quadrant sits top left and is decomposed again.
struct WaveletDecomposition {
    CoeffImage coeffs{1, 1};
    int levels = 0;
    int width = 0;   ///< source size before edge padding
    int height = 0;
    WaveletKind kind = WaveletKind::Haar;
};

/// Pads by edge replication to a multiple of 2^levels.
WaveletDecomposition wavelet_decompose(const GrayImage& img, int levels, WaveletKind kind = WaveletKind::Haar);
/// Exact inverse; values are clamped to [0, 255] only if coefficients were edited.
GrayImage wavelet_reconstruct(const WaveletDecomposition& dec);

/// Sum of squared detail coefficients of one level (1 = finest).
double detail_energy(const WaveletDecomposition& dec, int level);
/// Zeroes every band that is high-pass along x, leaving structure that is
/// smooth along the yarn axis.
void suppress_cross_axis_detail(WaveletDecomposition& dec);
/// Zeroes every detail band.
void keep_approximation(WaveletDecomposition& dec);

struct GradeOptions {
    int levels = 3;
    WaveletKind kind = WaveletKind::Haar;
    int saliency_window = 101;  ///< columns, odd
    double defect_threshold = 0.5;
    Polarity polarity = Polarity::BrightForeground;
};

/// Yarn core without protruding hairs: Otsu of the hair-suppressed
/// reconstruction, intersected with Otsu of the image itself.
BinaryImage separate_core(const GrayImage& img, const GradeOptions& options = {});

struct Defect {
    int first_col = 0;
    int last_col = 0;
    double center_col = 0;
    double peak_saliency = 0;
};

struct GradeSummary {
    double mean_width_px = 0;
    double mean_width_mm = 0;
    double cv_pct = 0;
    int defect_count = 0;
    double defects_per_m = 0;
    double saliency_p95 = 0;
};

struct GradeFeatures {
    Histogram256 diameter_histogram;
    std::vector<int> width_map;
    std::vector<double> saliency;
    std::vector<Defect> defects;
    GradeSummary summary;
};

/// |w - running median(w)| / running median, edges replicated.
std::vector<double> saliency_map(const std::vector<int>& widths, int window);

GradeFeatures extract_grade_features(const GrayImage& img, const metrology::Calibration& cal,
                                     const GradeOptions& options = {});

struct GradeReference {
    std::string label;
    double cv_pct = 0;
    double defects_per_m = 0;
    double saliency_p95 = 0;
};

struct GradeDecision {
    std::string label;
    std::vector<std::pair<std::string, double>> distances;  ///< per label, sorted by label
};

/// Nearest centroid; features scaled by their spread across the references.
GradeDecision classify_grade(const GradeSummary& sample, const std::vector<GradeReference>& references);

}  // namespace yarnscope::grade
