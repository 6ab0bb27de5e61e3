#include <cmath>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "certbound/channels.hpp"
#include "certbound/cli.hpp"
#include "certbound/error.hpp"
#include "certbound/fbl.hpp"
#include "certbound/gaussian.hpp"
#include "certbound/oracle.hpp"
#include "certbound/saddlepoint.hpp"
#include "certbound/stable.hpp"
#include "certbound/version.hpp"

namespace py = pybind11;
using namespace certbound;

namespace {

py::array_t<double> to_array(std::span<const double> xs) {
  py::array_t<double> out(static_cast<py::ssize_t>(xs.size()));
  std::copy(xs.begin(), xs.end(), out.mutable_data());
  return out;
}

py::array_t<double> weights_of(const Distribution& d) {
  py::array_t<double> out(static_cast<py::ssize_t>(d.size()));
  const auto lw = d.log_weights();
  for (std::size_t i = 0; i < lw.size(); ++i) out.mutable_data()[i] = std::exp(lw[i]);
  return out;
}

cli::RunConfig build_config(const std::string& yaml_text, const std::optional<std::string>& preset) {
  cli::RunConfig base;
  if (preset) base = cli::preset_config(*preset);
  cli::RunConfig cfg = yaml_text.empty() ? base : cli::parse_config(yaml_text, "<python>", base);
  cli::validate_config(cfg);
  return cfg;
}

py::object cell_to_py(const cli::Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? py::float_(*d) : py::object(py::none());
  if (const auto* s = std::get_if<std::string>(&c)) return py::str(*s);
  return py::none();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Saddlepoint tail envelopes and finite-blocklength bounds";
  m.attr("__version__") = std::string(kVersion);

  py::exception<Error>(m, "CertboundError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object cls = py::module_::import("certbound._core").attr("CertboundError");
      py::object inst = cls(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(cls.ptr(), inst.ptr());
    }
  });

  m.def("erfcx", py::vectorize(erfcx), py::arg("x"));
  m.def("gaussian_q", py::vectorize(gaussian_q), py::arg("v"));
  m.def("gaussian_cdf", py::vectorize(gaussian_cdf), py::arg("v"));
  m.def("log_gaussian_q", py::vectorize(log_gaussian_q), py::arg("v"));

  py::class_<Distribution>(m, "Distribution")
      .def_static("from_weights", &Distribution::from_weights, py::arg("values"), py::arg("weights"))
      .def_static("bernoulli", &Distribution::bernoulli, py::arg("p"))
      .def_static("gaussian", &gaussian_quadrature, py::arg("mean"), py::arg("variance"),
                  py::arg("nodes") = kDefaultQuadratureNodes)
      .def_static("chi_squared", &chi_squared_quadrature, py::arg("nodes") = kDefaultQuadratureNodes)
      .def_property_readonly("values", [](const Distribution& d) { return to_array(d.values()); })
      .def_property_readonly("log_weights", [](const Distribution& d) { return to_array(d.log_weights()); })
      .def_property_readonly("weights", &weights_of)
      .def_property_readonly("is_exact",
                             [](const Distribution& d) { return d.kind() == DistributionKind::ExactDiscrete; })
      .def("mean", &Distribution::mean)
      .def("variance", &Distribution::variance)
      .def("__len__", &Distribution::size)
      .def("__repr__", [](const Distribution& d) {
        return "<Distribution size=" + std::to_string(d.size()) +
               (d.kind() == DistributionKind::ExactDiscrete ? " exact>" : " quadrature>");
      });

  py::class_<TiltedMoments>(m, "TiltedMoments")
      .def_readonly("theta", &TiltedMoments::theta)
      .def_readonly("k", &TiltedMoments::k)
      .def_readonly("k1", &TiltedMoments::k1)
      .def_readonly("k2", &TiltedMoments::k2)
      .def_readonly("c3", &TiltedMoments::c3)
      .def_readonly("c4", &TiltedMoments::c4)
      .def_readonly("t3_abs", &TiltedMoments::t3_abs)
      .def_readonly("xi", &TiltedMoments::xi);

  m.def("tilted_moments", &tilted_moments, py::arg("dist"), py::arg("theta"));
  m.def("log_mgf", &log_mgf, py::arg("dist"), py::arg("theta"));
  m.def("tilt_distribution", &tilt_distribution, py::arg("dist"), py::arg("theta"));

  py::class_<BoundEnvelope>(m, "BoundEnvelope")
      .def_readonly("center", &BoundEnvelope::center)
      .def_readonly("lower", &BoundEnvelope::lower)
      .def_readonly("upper", &BoundEnvelope::upper)
      .def_readonly("radius", &BoundEnvelope::radius)
      .def_readonly("log_radius", &BoundEnvelope::log_radius)
      .def_property_readonly("method", [](const BoundEnvelope& b) { return std::string(to_string(b.method)); })
      .def("__repr__", [](const BoundEnvelope& b) {
        return "<BoundEnvelope " + std::string(to_string(b.method)) + " [" + std::to_string(b.lower) + ", " +
               std::to_string(b.upper) + "]>";
      });

  py::class_<SaddlepointSolve>(m, "SaddlepointSolve")
      .def_readonly("theta_star", &SaddlepointSolve::theta_star)
      .def_readonly("a", &SaddlepointSolve::a)
      .def_readonly("n", &SaddlepointSolve::n)
      .def_readonly("residual", &SaddlepointSolve::residual)
      .def_readonly("iterations", &SaddlepointSolve::iterations)
      .def_readonly("moments", &SaddlepointSolve::moments);

  m.def("solve_theta_star", &solve_theta_star, py::arg("dist"), py::arg("n"), py::arg("a"));
  m.def("eta", py::overload_cast<const Distribution&, double, double, std::size_t>(&eta), py::arg("dist"),
        py::arg("theta"), py::arg("a"), py::arg("n"));
  m.def("saddlepoint_cdf", &saddlepoint_cdf, py::arg("dist"), py::arg("n"), py::arg("a"));
  m.def("saddlepoint_pdf", &saddlepoint_pdf, py::arg("dist"), py::arg("n"), py::arg("x"),
        py::arg("correction") = false);
  m.def("thm2_envelope", &thm2_envelope, py::arg("dist"), py::arg("theta"), py::arg("a"), py::arg("n"));
  m.def("thm3_envelope", &thm3_envelope, py::arg("dist"), py::arg("n"), py::arg("a"));
  m.def("berry_esseen_envelope", &berry_esseen_envelope, py::arg("dist"), py::arg("n"), py::arg("a"));
  m.def("exponent_h", &exponent_h, py::arg("dist"), py::arg("n"), py::arg("a"));

  m.def("convolve_sum", &convolve_sum, py::arg("dist"), py::arg("n"));
  m.def("binomial_cdf", [](std::size_t n, double p, double a) { return exact_cdf(BinomialLaw{n, p}, a); },
        py::arg("n"), py::arg("p"), py::arg("a"));
  m.def("gamma_cdf", [](double shape, double scale, double a) { return exact_cdf(GammaLaw{shape, scale}, a); },
        py::arg("shape"), py::arg("scale"), py::arg("a"));
  m.def("gaussian_sum_cdf",
        [](double mean, double variance, double a) { return exact_cdf(GaussianLaw{mean, variance}, a); },
        py::arg("mean"), py::arg("variance"), py::arg("a"));

  py::class_<McEstimate>(m, "McEstimate")
      .def_readonly("value", &McEstimate::value)
      .def_readonly("stderr", &McEstimate::stderr_)
      .def_readonly("samples", &McEstimate::samples)
      .def_readonly("ci95_low", &McEstimate::ci95_low)
      .def_readonly("ci95_high", &McEstimate::ci95_high)
      .def_readonly("seed", &McEstimate::seed);

  py::class_<McFblTerms>(m, "McFblTerms")
      .def_readonly("joint_cdf", &McFblTerms::joint_cdf)
      .def_readonly("scaled_ind_sf", &McFblTerms::scaled_ind_sf)
      .def_readonly("sum", &McFblTerms::sum);

  m.def("mc_cdf", &mc_cdf, py::arg("dist"), py::arg("n"), py::arg("a"), py::arg("samples"), py::arg("seed"),
        py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());
  m.def("mc_fbl_terms", &mc_fbl_terms, py::arg("density"), py::arg("n"), py::arg("threshold_log"),
        py::arg("samples"), py::arg("seed"), py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());

  m.def("sas_density", py::vectorize(sas_density), py::arg("alpha"), py::arg("sigma"), py::arg("z"));

  py::class_<ChannelModel>(m, "ChannelModel")
      .def_static("bsc", &ChannelModel::bsc, py::arg("delta"))
      .def_static("bi_awgn", &ChannelModel::bi_awgn, py::arg("snr"))
      .def_static("bi_sas", &ChannelModel::bi_sas, py::arg("alpha"), py::arg("sigma"), py::arg("amplitude") = 1.0)
      .def("describe", &ChannelModel::describe)
      .def("__repr__", &ChannelModel::describe);

  py::class_<DensityBuild>(m, "DensityBuild")
      .def_readonly("joint", &DensityBuild::joint)
      .def_readonly("independent", &DensityBuild::independent)
      .def_readonly("nodes", &DensityBuild::nodes)
      .def_readonly("y_lower", &DensityBuild::y_lower)
      .def_readonly("y_upper", &DensityBuild::y_upper)
      .def_readonly("channel", &DensityBuild::channel);

  m.def("build_density", &build_density_dist, py::arg("channel"), py::arg("nodes") = kDefaultQuadratureNodes,
        py::arg("input_sign") = 1);

  py::class_<CodeSize>(m, "CodeSize")
      .def(py::init([](double log2_m) { return CodeSize{log2_m}; }), py::arg("log2_m"))
      .def_static("from_rate", &CodeSize::from_rate, py::arg("n"), py::arg("rate"))
      .def_readonly("log2_m", &CodeSize::log2_m)
      .def("ln_m", &CodeSize::ln_m)
      .def("dt_threshold", &CodeSize::dt_threshold);

  py::class_<NormalTriple>(m, "NormalTriple")
      .def_readonly("d", &NormalTriple::d)
      .def_readonly("alpha", &NormalTriple::alpha)
      .def_readonly("n_upper", &NormalTriple::n_upper);

  py::class_<SaddlepointTriple>(m, "SaddlepointTriple")
      .def_readonly("g", &SaddlepointTriple::g)
      .def_readonly("beta", &SaddlepointTriple::beta)
      .def_readonly("s", &SaddlepointTriple::s)
      .def_readonly("beta1", &SaddlepointTriple::beta1)
      .def_readonly("scaled_beta2", &SaddlepointTriple::scaled_beta2)
      .def_readonly("g1", &SaddlepointTriple::g1)
      .def_readonly("scaled_g2", &SaddlepointTriple::scaled_g2)
      .def_readonly("radius", &SaddlepointTriple::radius);

  py::class_<FblPoint>(m, "FblPoint")
      .def_readonly("n", &FblPoint::n)
      .def_readonly("rate", &FblPoint::rate)
      .def_readonly("log2_m", &FblPoint::log2_m)
      .def_readonly("log_gamma", &FblPoint::log_gamma)
      .def_readonly("theta", &FblPoint::theta)
      .def_readonly("normal", &FblPoint::normal)
      .def_readonly("sp", &FblPoint::sp)
      .def_readonly("exact", &FblPoint::exact)
      .def_property_readonly("flavor", [](const FblPoint& p) { return p.flavor == FblFlavor::Dt ? "dt" : "mc"; })
      .def_property_readonly("flags", [](const FblPoint& p) { return flags_to_string(p.flags); });

  py::class_<GammaSearch>(m, "GammaSearch")
      .def_readonly("log_gamma", &GammaSearch::log_gamma)
      .def_readonly("objective", &GammaSearch::objective)
      .def_readonly("grid_fallback", &GammaSearch::grid_fallback)
      .def_readonly("point", &GammaSearch::point);

  m.def("dt_bounds", &dt_bounds, py::arg("density"), py::arg("n"), py::arg("m"));
  m.def("mc_bounds", &mc_bounds, py::arg("density"), py::arg("n"), py::arg("m"), py::arg("log_gamma"));
  m.def("mc_optimize_gamma", &mc_optimize_gamma, py::arg("density"), py::arg("n"), py::arg("m"));
  m.def("bsc_exact_t", &bsc_exact_t, py::arg("delta"), py::arg("n"), py::arg("m"));
  m.def("bsc_exact_c", &bsc_exact_c, py::arg("delta"), py::arg("n"), py::arg("m"), py::arg("log_gamma"));

  m.attr("PRESETS") = [] {
    py::list names;
    for (auto name : cli::kPresetNames) names.append(std::string(name));
    return names;
  }();

  m.def(
      "run_table",
      [](const std::string& yaml_text, const std::optional<std::string>& preset, unsigned threads) {
        const cli::RunConfig cfg = build_config(yaml_text, preset);
        cli::Table table;
        {
          py::gil_scoped_release release;
          table = cli::run(cfg, threads);
        }
        py::list rows;
        for (const auto& row : table.rows) {
          py::list r;
          for (const auto& c : row) r.append(cell_to_py(c));
          rows.append(r);
        }
        py::list failures;
        for (const auto& f : table.failures) failures.append(py::make_tuple(f.row, f.context, f.message));
        py::dict out;
        out["columns"] = table.columns;
        out["rows"] = rows;
        out["failures"] = failures;
        return out;
      },
      py::arg("yaml_text") = "", py::arg("preset") = py::none(), py::arg("threads") = 1);

  m.def(
      "render",
      [](const std::string& yaml_text, const std::optional<std::string>& preset, const std::string& format,
         unsigned threads) {
        cli::RunConfig cfg = build_config(yaml_text, preset);
        if (format != "csv" && format != "json") throw Error(ErrorCode::ConfigError, "format must be csv or json");
        cfg.format = format == "csv" ? cli::OutputFormat::Csv : cli::OutputFormat::Json;
        py::gil_scoped_release release;
        const cli::Table table = cli::run(cfg, threads);
        return format == "csv" ? cli::to_csv(cfg, table) : cli::to_json(cfg, table);
      },
      py::arg("yaml_text") = "", py::arg("preset") = py::none(), py::arg("format") = "csv", py::arg("threads") = 1);
}
