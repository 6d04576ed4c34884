#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "yarnscope/raster.hpp"

namespace yarnscope::metrology {

/// Pixel scale of an image: pixels per millimetre.
class Calibration {
public:
    explicit Calibration(double pixels_per_mm);

    double pixels_per_mm() const noexcept { return pixels_per_mm_; }
    double to_mm(double pixels) const noexcept { return pixels / pixels_per_mm_; }
    double to_px(double mm) const noexcept { return mm * pixels_per_mm_; }

private:
    double pixels_per_mm_;
};

/// Scale from a reference object spanning `pixels` that is `mm` long.
Calibration calibrate(double pixels, double mm);
double px_to_mm(const Calibration& cal, double pixels);

/// Per-column yarn width in pixels, one entry per image column.
struct WidthProfile {
    std::vector<int> widths;

    std::size_t nonzero_columns() const;
};

/// Outer-edge distance per column; gaps between the extreme foreground rows
/// are bridged.
WidthProfile width_profile(const BinaryImage& bin);

struct DiameterStats {
    double mean_mm = 0;
    double min_mm = 0;
    double max_mm = 0;
    double cv = 0;  ///< population stdev / mean
    double mean_px = 0;
    std::size_t n_columns = 0;
};

/// Statistics over nonzero columns only.
DiameterStats mean_diameter(const WidthProfile& profile, const Calibration& cal);

enum class DiameterMode {
    Percentile,  ///< plateau crossing at a fraction of its height (D_PERC)
    Inflection,  ///< centroid of each edge's gradient lobe (D_INFL)
};

struct HistogramDiameterOptions {
    DiameterMode mode = DiameterMode::Percentile;
    double percentile = 0.5;
    int smoothing_radius = 1;
};

/// Yarn width in pixels from the transverse (row-mean) intensity profile.
/// Works for yarn brighter or darker than the background.
double histogram_level_diameter(const GrayImage& img, const HistogramDiameterOptions& options = {});

enum class CountSystem { Tex, Nm, Ne1 };

struct YarnCount {
    double value;
    CountSystem system;
};

inline constexpr double kTexPerNe1 = 590.5;

YarnCount count_convert(YarnCount count, CountSystem target);
std::string to_string(CountSystem system);
CountSystem parse_count_system(const std::string& name);

struct DiameterBand {
    double min_mm;
    double max_mm;
    bool contains(double mm) const noexcept { return mm >= min_mm && mm <= max_mm; }
};

/// Theoretical diameter band 0.035..0.040 * sqrt(tex), in millimetres.
DiameterBand trommer_band(YarnCount count);

}  // namespace yarnscope::metrology
