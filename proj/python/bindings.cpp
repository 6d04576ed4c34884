#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "yarnscope/cli.hpp"
#include "yarnscope/errors.hpp"
#include "yarnscope/grade.hpp"
#include "yarnscope/metrology.hpp"
#include "yarnscope/raster.hpp"
#include "yarnscope/slub.hpp"
#include "yarnscope/splice.hpp"
#include "yarnscope/stats.hpp"
#include "yarnscope/synthgen.hpp"
#include "yarnscope/texture.hpp"
#include "yarnscope/twist.hpp"

namespace py = pybind11;
using namespace yarnscope;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

GrayImage to_image(const U8Array& a) {
    if (a.ndim() != 2) throw ParameterError("expected a 2-D uint8 array (rows, columns)");
    const auto h = static_cast<int>(a.shape(0));
    const auto w = static_cast<int>(a.shape(1));
    return GrayImage(w, h, std::vector<std::uint8_t>(a.data(), a.data() + a.size()));
}

template <class Img>
U8Array to_array(const Img& img) {
    U8Array out({img.height(), img.width()});
    std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
    return out;
}

synth::YarnRenderSpec yarn_spec(const std::string& spec_json) {
    return nlohmann::json::parse(spec_json).get<synth::YarnRenderSpec>();
}

}  // namespace

PYBIND11_MODULE(_yarnscope, m) {
    m.doc() = "Yarn image metrology";
    m.attr("__version__") = YARNSCOPE_VERSION;

    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<AnalysisError>(m, "AnalysisError", PyExc_RuntimeError);

    m.def("calibrate", [](double pixels, double mm) { return metrology::calibrate(pixels, mm).pixels_per_mm(); },
          py::arg("pixels"), py::arg("mm"), "Pixels per millimetre from a reference length.");
    m.def("px_to_mm", [](double px, double px_per_mm) { return metrology::Calibration(px_per_mm).to_mm(px); },
          py::arg("px"), py::arg("px_per_mm"));
    m.def(
        "trommer_band",
        [](double count, const std::string& system) {
            const auto b = metrology::trommer_band({count, metrology::parse_count_system(system)});
            return std::make_pair(b.min_mm, b.max_mm);
        },
        py::arg("count"), py::arg("system") = "tex", "Theoretical diameter band (min_mm, max_mm).");

    m.def("band_threshold", [](const U8Array& a, int lo, int hi) { return to_array(band_threshold(to_image(a), lo, hi)); },
          py::arg("image"), py::arg("tmin"), py::arg("tmax"));
    m.def("otsu_threshold", [](const U8Array& a) { return otsu_threshold(to_image(a)); }, py::arg("image"));
    m.def(
        "histogram_level_diameter",
        [](const U8Array& a, const std::string& mode) {
            metrology::HistogramDiameterOptions o;
            if (mode == "inflection") {
                o.mode = metrology::DiameterMode::Inflection;
            } else if (mode != "percentile") {
                throw ParameterError("mode must be percentile or inflection");
            }
            return metrology::histogram_level_diameter(to_image(a), o);
        },
        py::arg("image"), py::arg("mode") = "percentile", "Yarn width in pixels.");

    m.def(
        "twist_angle",
        [](const U8Array& a, const std::string& method) {
            const auto core = twist::extract_core(to_image(a)).core;
            twist::AngleEstimate e;
            if (method == "fft") {
                e = twist::dominant_angle_fft(core);
            } else if (method == "lines") {
                e = twist::dominant_angle_lines(core);
            } else {
                throw ParameterError("method must be fft or lines");
            }
            return py::dict(py::arg("angle_deg") = e.angle_deg, py::arg("direction") = twist::to_string(e.direction));
        },
        py::arg("image"), py::arg("method") = "fft");

    m.def(
        "detect_slubs",
        [](const U8Array& a, double px_per_mm) {
            const auto rep = slub::detect_slubs(metrology::width_profile(otsu_binarize(to_image(a))),
                                                metrology::Calibration(px_per_mm));
            py::list segs;
            for (const auto& s : rep.segments) {
                segs.append(py::dict(py::arg("start_mm") = s.start_mm, py::arg("length_mm") = s.length_mm,
                                     py::arg("amplitude_pct") = s.amplitude_pct));
            }
            return py::dict(py::arg("base_width_px") = rep.base_width_px, py::arg("segments") = segs,
                            py::arg("distances_mm") = rep.distances_mm);
        },
        py::arg("image"), py::arg("px_per_mm"));

    m.def(
        "classify_opening",
        [](double y, double l, double w1, std::optional<double> w2, std::optional<double> w3, double r_open,
           double r_over) {
            splice::OpeningMeasurement om;
            om.y_mm = y;
            om.l_mm = l;
            om.w1_mm = w1;
            om.w2_mm = w2;
            om.w3_mm = w3;
            return splice::to_string(splice::classify_opening(om, {r_open, r_over}));
        },
        py::arg("y_mm"), py::arg("l_mm"), py::arg("w1_mm"), py::arg("w2_mm") = py::none(),
        py::arg("w3_mm") = py::none(), py::arg("r_open") = 2.0, py::arg("r_over") = 0.5);

    m.def(
        "one_way_anova",
        [](const stats::Groups& groups) {
            const auto t = stats::one_way_anova(groups);
            return py::dict(py::arg("ss_between") = t.between.sum_of_squares, py::arg("ss_error") = t.error.sum_of_squares,
                            py::arg("df_between") = t.between.df, py::arg("df_error") = t.error.df,
                            py::arg("ms_error") = t.error.mean_square,
                            py::arg("f") = t.f ? py::cast(*t.f) : py::cast(std::numeric_limits<double>::infinity()),
                            py::arg("p_value") = t.p_value);
        },
        py::arg("groups"));
    m.def(
        "pairwise_mean_diff",
        [](const std::vector<double>& means, const std::vector<std::size_t>& ns, double ms_error, int df_error) {
            py::list out;
            for (const auto& p : stats::pairwise_mean_diff(means, ns, ms_error, df_error)) {
                out.append(py::dict(py::arg("i") = p.i, py::arg("j") = p.j, py::arg("diff") = p.diff,
                                    py::arg("se") = p.se, py::arg("p_value") = p.p_value));
            }
            return out;
        },
        py::arg("means"), py::arg("ns"), py::arg("ms_error"), py::arg("df_error"));

    m.def(
        "analyze_texture",
        [](const U8Array& a) {
            const auto r = texture::analyze_texture(to_image(a));
            return py::dict(py::arg("mean_angle_deg") = r.mean_angle_deg, py::arg("cv_pct") = r.cv_pct,
                            py::arg("orientation_index") = r.orientation_index, py::arg("n_traces") = r.n_traces);
        },
        py::arg("image"));

    m.def(
        "haar_roundtrip",
        [](const U8Array& a, int levels) {
            return to_array(grade::wavelet_reconstruct(grade::wavelet_decompose(to_image(a), levels)));
        },
        py::arg("image"), py::arg("levels") = 3, "Decompose and reconstruct with integer Haar lifting.");
    m.def(
        "separate_core", [](const U8Array& a) { return to_array(grade::separate_core(to_image(a))); },
        py::arg("image"), "Binary (0/1) yarn core with hairs suppressed.");

    m.def(
        "_render_yarn",
        [](const std::string& spec_json, bool stripes) { return to_array(synth::render_yarn(yarn_spec(spec_json), stripes)); },
        py::arg("spec_json"), py::arg("stripes") = false);
    m.def(
        "_render_fiber_field",
        [](const std::string& spec_json) {
            return to_array(synth::render_fiber_field(nlohmann::json::parse(spec_json).get<synth::FiberFieldSpec>()));
        },
        py::arg("spec_json"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args, const std::string& stdin_bytes) {
            std::istringstream in(stdin_bytes);
            std::ostringstream out;
            std::ostringstream err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = cli::run(args, in, out, err);
            }
            return py::make_tuple(code, py::bytes(out.str()), err.str());
        },
        py::arg("args"), py::arg("stdin") = std::string(),
        "Runs one command line in process; returns (exit_code, stdout_bytes, stderr_text).");
}
