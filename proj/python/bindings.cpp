#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <map>

#include "hybridspin/deer_sim.hpp"
#include "hybridspin/dipolar_bath.hpp"
#include "hybridspin/error.hpp"
#include "hybridspin/io.hpp"
#include "hybridspin/odmr.hpp"
#include "hybridspin/relaxometry.hpp"
#include "hybridspin/spin_core.hpp"

namespace py = pybind11;
using namespace hybridspin;

namespace {

constexpr ErrorKind kAllKinds[] = {
    ErrorKind::InvalidArgument, ErrorKind::NotHermitian,     ErrorKind::AmbiguousLabeling, ErrorKind::FitDiverged,
    ErrorKind::DegenerateData,  ErrorKind::NonFiniteInput,   ErrorKind::ZeroShape,         ErrorKind::ParseError,
    ErrorKind::NonMonotoneDepth, ErrorKind::NegativeDensity, ErrorKind::NoDecay,           ErrorKind::GridMismatch,
    ErrorKind::ConfigError,
};

// Kept alive for the lifetime of the interpreter.
std::map<ErrorKind, py::object>& exception_types() {
  static auto* types = new std::map<ErrorKind, py::object>();
  return *types;
}

LayeredProfile profile_from(const std::vector<std::pair<double, double>>& rows) {
  std::vector<Layer> layers;
  for (const auto& [d, rho] : rows) layers.push_back({d, rho});
  return LayeredProfile(layers);
}

std::vector<std::pair<double, double>> rows_from(const LayeredProfile& profile) {
  std::vector<std::pair<double, double>> out;
  for (const Layer& l : profile.layers()) out.emplace_back(l.depth_nm, l.density_nm2);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spin physics of NV / V_B- hybrid sensors";
  m.attr("__version__") = HYBRIDSPIN_VERSION;

  // Exceptions: one subclass of HybridSpinError per error kind.
  static py::exception<Error> base(m, "HybridSpinError");
  for (ErrorKind kind : kAllKinds) {
    const std::string name(to_string(kind));
    py::object type = py::reinterpret_borrow<py::object>(
        PyErr_NewException(("hybridspin._core." + name).c_str(), base.ptr(), nullptr));
    m.attr(name.c_str()) = type;
    exception_types()[kind] = type;
  }
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(exception_types().at(e.kind()).ptr(), e.what());
    }
  });

  // ---------------------------------------------------------------- spins
  py::enum_<Manifold>(m, "Manifold").value("GROUND", Manifold::Ground).value("EXCITED", Manifold::Excited);

  py::class_<SpinSpecies>(m, "SpinSpecies")
      .def(py::init([](std::string name, double d_gs, double d_es, double e, double gamma, Vec3 axis) {
             // The axis is normalized here, as it is for JSON species files.
             const double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
             if (n > 0.0) axis = {axis[0] / n, axis[1] / n, axis[2] / n};
             SpinSpecies s{std::move(name), d_gs, d_es, e, gamma, axis};
             s.validate();
             return s;
           }),
           py::arg("name"), py::arg("d_gs_mhz"), py::arg("d_es_mhz"), py::arg("e_strain_mhz") = 0.0,
           py::arg("gamma_e_mhz_per_mt") = 28.025, py::arg("axis") = Vec3{0.0, 0.0, 1.0})
      .def_static("from_file", &io::load_species_file, py::arg("path"))
      .def_readwrite("name", &SpinSpecies::name)
      .def_readwrite("d_gs_mhz", &SpinSpecies::d_gs_mhz)
      .def_readwrite("d_es_mhz", &SpinSpecies::d_es_mhz)
      .def_readwrite("e_strain_mhz", &SpinSpecies::e_strain_mhz)
      .def_readwrite("gamma_e_mhz_per_mt", &SpinSpecies::gamma_e_mhz_per_mt)
      .def_readwrite("axis", &SpinSpecies::axis)
      .def("__repr__", [](const SpinSpecies& s) { return "SpinSpecies(" + io::to_json(s).dump() + ")"; });

  py::class_<FieldConfig>(m, "FieldConfig")
      .def_static("along", &FieldConfig::along, py::arg("direction"), py::arg("magnitude_mt"))
      .def_static("at_angle", &FieldConfig::at_angle, py::arg("species"), py::arg("magnitude_mt"),
                  py::arg("angle_deg"))
      .def_readonly("magnitude_mt", &FieldConfig::magnitude_mt)
      .def_readonly("direction", &FieldConfig::direction);

  py::class_<EigenDecomposition>(m, "EigenDecomposition")
      .def_readonly("energies", &EigenDecomposition::energies)
      .def_readonly("amplitudes", &EigenDecomposition::amplitudes)
      .def_readonly("manifold", &EigenDecomposition::manifold)
      .def("reconstruct", &EigenDecomposition::reconstruct);

  m.def("build_hamiltonian", &build_hamiltonian, py::arg("species"), py::arg("field"),
        py::arg("manifold") = Manifold::Ground);
  m.def("diagonalize", &diagonalize, py::arg("h"), py::arg("manifold") = Manifold::Ground);
  m.def(
      "transition_frequencies",
      [](const SpinSpecies& s, const FieldConfig& f, Manifold man) {
        const auto t = transition_frequencies(s, f, man);
        return std::make_pair(t.f_minus_mhz, t.f_plus_mhz);
      },
      py::arg("species"), py::arg("field"), py::arg("manifold") = Manifold::Ground,
      "(f_minus, f_plus) in MHz");
  m.def("mixing_overlaps", py::overload_cast<const SpinSpecies&, const FieldConfig&, Manifold>(&mixing_overlaps),
        py::arg("species"), py::arg("field"), py::arg("manifold") = Manifold::Ground);
  m.def(
      "mixing_scan",
      [](const SpinSpecies& s, double angle_deg, const std::vector<double>& b, Manifold man) {
        std::vector<LevelOverlaps> out;
        for (const MixingRow& r : mixing_scan(s, angle_deg, b, man)) out.push_back(r.levels);
        return out;
      },
      py::arg("species"), py::arg("angle_deg"), py::arg("b_grid_mt"), py::arg("manifold") = Manifold::Ground);

  // ----------------------------------------------------------------- odmr
  py::class_<OdmrLine>(m, "OdmrLine")
      .def(py::init([](double c, double w, double k) { return OdmrLine{c, w, k}; }), py::arg("center_mhz"),
           py::arg("linewidth_fwhm_mhz"), py::arg("contrast"))
      .def_readwrite("center_mhz", &OdmrLine::center_mhz)
      .def_readwrite("linewidth_fwhm_mhz", &OdmrLine::linewidth_fwhm_mhz)
      .def_readwrite("contrast", &OdmrLine::contrast);
  m.def("lorentzian", &lorentzian, py::arg("f_mhz"), py::arg("center_mhz"), py::arg("fwhm_mhz"));
  m.def(
      "contrast_factor",
      [](const SpinSpecies& s, const FieldConfig& f, double base, std::optional<ContrastModel> model) {
        return model ? contrast_factor(s, f, base, *model) : contrast_factor(s, f, base);
      },
      py::arg("species"), py::arg("field"), py::arg("base_contrast"), py::arg("model") = py::none());
  m.def("species_lines", &species_lines, py::arg("species"), py::arg("field"), py::arg("base_contrast"),
        py::arg("linewidth_fwhm_mhz"));
  m.def(
      "synthesize_spectrum",
      [](const std::vector<OdmrLine>& lines, const std::vector<double>& grid) {
        return synthesize_spectrum(lines, grid).signal;
      },
      py::arg("lines"), py::arg("grid_mhz"));

  // ---------------------------------------------------------- relaxometry
  py::class_<RelaxModel>(m, "RelaxModel")
      .def(py::init([](double b, double g, double base, double fc) { return RelaxModel{b, g, base, fc}; }),
           py::arg("b_khz"), py::arg("gamma_mhz"), py::arg("baseline_per_ms"), py::arg("f_center_mhz"))
      .def_readwrite("b_khz", &RelaxModel::b_khz)
      .def_readwrite("gamma_mhz", &RelaxModel::gamma_mhz)
      .def_readwrite("baseline_per_ms", &RelaxModel::baseline_per_ms)
      .def_readwrite("f_center_mhz", &RelaxModel::f_center_mhz)
      .def("strong_dephasing", &RelaxModel::strong_dephasing);
  py::class_<RelaxFit>(m, "RelaxFit")
      .def_readonly("model", &RelaxFit::model)
      .def_readonly("covariance", &RelaxFit::covariance)
      .def_readonly("chi2", &RelaxFit::chi2)
      .def_readonly("iterations", &RelaxFit::iterations)
      .def_readonly("weighted", &RelaxFit::weighted)
      .def_readonly("strong_dephasing", &RelaxFit::strong_dephasing);
  m.def("relaxation_rate", &relaxation_rate, py::arg("model"), py::arg("f_plus_mhz"));
  m.def("simulate_t1_trace", &simulate_t1_trace, py::arg("t1_ms"), py::arg("t_grid_ms"));
  m.def(
      "fit_relaxometry",
      [](const std::vector<double>& f, const std::vector<double>& rate, std::optional<std::vector<double>> sigma,
         std::optional<RelaxModel> init) {
        if (f.size() != rate.size() || (sigma && sigma->size() != f.size())) {
          throw Error(ErrorKind::InvalidArgument, "f_plus, rate and sigma must have equal lengths");
        }
        std::vector<RelaxometryPoint> pts;
        for (std::size_t i = 0; i < f.size(); ++i) {
          pts.push_back({f[i], rate[i], sigma ? std::optional<double>((*sigma)[i]) : std::nullopt});
        }
        return init ? fit_relaxometry(pts, *init) : fit_relaxometry(pts);
      },
      py::arg("f_plus_mhz"), py::arg("rate_per_ms"), py::arg("sigma_per_ms") = py::none(),
      py::arg("init") = py::none());
  m.def(
      "linear_regression",
      [](const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& sigma) {
        const LinearFit fit = linear_regression(x, y, sigma);
        py::dict d;
        d["slope"] = fit.slope;
        d["intercept"] = fit.intercept;
        d["slope_sigma"] = fit.slope_sigma;
        d["intercept_sigma"] = fit.intercept_sigma;
        return d;
      },
      py::arg("x"), py::arg("y"), py::arg("sigma") = std::vector<double>{});

  // -------------------------------------------------------- dipolar bath
  m.def("dipolar_constant", &dipolar_constant);
  m.def(
      "load_depth_profile", [](const std::string& path) { return rows_from(load_depth_profile_file(path)); },
      py::arg("path"), "List of (depth_nm, density_nm2) rows.");
  m.def(
      "coupling_from_profile",
      [](const std::vector<std::pair<double, double>>& rows, double standoff) {
        const auto est = coupling_from_profile(profile_from(rows).shifted(standoff));
        py::dict d;
        d["b_khz"] = est.b_khz;
        d["b_rms_mt"] = est.b_rms_mt;
        return d;
      },
      py::arg("layers"), py::arg("standoff_nm") = 0.0);
  m.def(
      "estimate_density",
      [](double b, double sb, const std::vector<std::pair<double, double>>& shape, double standoff) {
        const auto est = estimate_density(b, sb, profile_from(shape).normalized(), standoff);
        py::dict d;
        d["rho_total_nm2"] = est.rho_total_nm2;
        d["rho_sigma_nm2"] = est.rho_sigma_nm2;
        d["b_rms_mt"] = est.b_rms_mt;
        return d;
      },
      py::arg("b_khz"), py::arg("b_sigma_khz"), py::arg("shape"), py::arg("standoff_nm"));

  // ----------------------------------------------------------------- deer
  m.def("coupling_prefactor", &coupling_prefactor);
  m.def("hahn_envelope", &hahn_envelope, py::arg("tau_us"), py::arg("t2_us"), py::arg("stretch_n") = 1.0);
  m.def(
      "deer_signal",
      [](const std::vector<std::pair<double, double>>& layers, double standoff, double p, double eta,
         const std::vector<double>& tau, double t2, double stretch, std::size_t samples, std::uint64_t seed,
         const std::string& sequence, double cutoff, std::size_t threads) {
        BathSpec spec;
        spec.profile = profile_from(layers);
        spec.nv_standoff_nm = standoff;
        spec.polarization = p;
        spec.drive_efficiency = eta;
        spec.lateral_cutoff_nm = cutoff > 0.0 ? cutoff : spec.minimum_cutoff_nm();
        DeerConfig c;
        c.tau_grid_us = tau;
        c.t2_us = t2;
        c.stretch_n = stretch;
        c.n_samples = samples;
        c.seed = seed;
        c.sequence = sequence_from_string(sequence);
        c.threads = threads;
        DeerSignal s;
        {
          py::gil_scoped_release release;
          s = deer_signal(spec, c);
        }
        py::dict d;
        d["tau_us"] = s.tau_us;
        d["coherence"] = s.coherence;
        d["quadrature"] = s.quadrature;
        d["std_error"] = s.std_error;
        d["oscillation_frequency_mhz"] = oscillation_frequency(s);
        try {
          d["decay_rate_per_us"] = deer_decay_rate(s);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::NoDecay) throw;
          d["decay_rate_per_us"] = py::none();
        }
        return d;
      },
      py::arg("layers"), py::arg("standoff_nm"), py::arg("polarization") = 0.0, py::arg("eta") = 1.0,
      py::arg("tau_us"), py::arg("t2_us"), py::arg("stretch_n") = 1.0, py::arg("samples") = 1000,
      py::arg("seed") = 0, py::arg("sequence") = "deer", py::arg("cutoff_nm") = 0.0, py::arg("threads") = 0);
}
