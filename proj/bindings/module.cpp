#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rdlocal/cli.hpp"
#include "rdlocal/dataset_io.hpp"
#include "rdlocal/estimators.hpp"
#include "rdlocal/inference.hpp"
#include "rdlocal/ingest.hpp"
#include "rdlocal/kernels.hpp"
#include "rdlocal/local_poly.hpp"
#include "rdlocal/stats.hpp"
#include "rdlocal/synthetic.hpp"

namespace py = pybind11;
using namespace rdlocal;

namespace {

Dataset dataset_from_arrays(const std::vector<double>& z, const std::vector<double>& y,
                            const std::vector<double>& x,
                            const std::vector<double>& weight,
                            const std::vector<std::vector<double>>& covariates,
                            const std::vector<std::string>& covariate_names,
                            double cutoff) {
  const std::size_t n = z.size();
  if (y.size() != n) throw parameter_error("dataset_from_arrays: y length differs from z");
  if (!x.empty() && x.size() != n)
    throw parameter_error("dataset_from_arrays: x length differs from z");
  if (!weight.empty() && weight.size() != n)
    throw parameter_error("dataset_from_arrays: weight length differs from z");
  if (covariates.size() != covariate_names.size())
    throw parameter_error(
        "dataset_from_arrays: one name per covariate column is required");
  for (const auto& col : covariates)
    if (col.size() != n)
      throw parameter_error("dataset_from_arrays: covariate column length differs");

  Dataset d;
  d.cutoff = cutoff;
  d.covariate_names = covariate_names;
  d.observations.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Observation& obs = d.observations[i];
    obs.z = z[i];
    obs.y = y[i];
    obs.x = x.empty() ? 0.0 : x[i];
    obs.weight = weight.empty() ? 1.0 : weight[i];
    obs.covariates.reserve(covariates.size());
    for (const auto& col : covariates) obs.covariates.push_back(col[i]);
  }
  return d;
}

std::vector<double> polyfit_arrays(const std::vector<double>& z,
                                   const std::vector<double>& y,
                                   const std::vector<double>& w, double center,
                                   int order) {
  if (y.size() != z.size() || (!w.empty() && w.size() != z.size()))
    throw parameter_error("weighted_polyfit: input lengths differ");
  std::vector<WPoint> pts(z.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    pts[i] = {z[i], y[i], w.empty() ? 1.0 : w[i]};
  return weighted_polyfit(pts, center, order);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "local polynomial estimation for discontinuity and kink designs";

  static py::exception<error> exc_error(m, "Error");
  py::register_exception<parameter_error>(m, "ParameterError", exc_error);
  py::register_exception<sample_size_error>(m, "SampleSizeError", exc_error);
  py::register_exception<singular_fit_error>(m, "SingularFitError", exc_error);
  py::register_exception<weak_first_stage_error>(m, "WeakFirstStageError", exc_error);
  py::register_exception<degenerate_curvature_error>(m, "DegenerateCurvatureError",
                                                     exc_error);
  py::register_exception<schema_error>(m, "SchemaError", exc_error);
  py::register_exception<config_error>(m, "ConfigError", exc_error);
  py::register_exception<io_error>(m, "IoError", exc_error);

  py::enum_<DesignKind>(m, "DesignKind")
      .value("Sharp", DesignKind::Sharp)
      .value("Fuzzy", DesignKind::Fuzzy);
  py::enum_<KernelKind>(m, "KernelKind")
      .value("Triangular", KernelKind::Triangular)
      .value("Uniform", KernelKind::Uniform);
  py::enum_<Side>(m, "Side").value("Left", Side::Left).value("Right", Side::Right);
  py::enum_<FitVar>(m, "FitVar")
      .value("Outcome", FitVar::Outcome)
      .value("Treatment", FitVar::Treatment);
  py::enum_<VarianceEstimator>(m, "VarianceEstimator")
      .value("NearestNeighbor", VarianceEstimator::NearestNeighbor)
      .value("HCPlugin", VarianceEstimator::HCPlugin);
  py::enum_<BandwidthSide>(m, "BandwidthSide")
      .value("Pooled", BandwidthSide::Pooled)
      .value("Left", BandwidthSide::Left)
      .value("Right", BandwidthSide::Right);
  py::enum_<Sex>(m, "Sex").value("Female", Sex::Female).value("Male", Sex::Male);

  py::class_<Observation>(m, "Observation")
      .def(py::init<>())
      .def_readwrite("z", &Observation::z)
      .def_readwrite("y", &Observation::y)
      .def_readwrite("x", &Observation::x)
      .def_readwrite("covariates", &Observation::covariates)
      .def_readwrite("weight", &Observation::weight);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("observations", &Dataset::observations)
      .def_readwrite("cutoff", &Dataset::cutoff)
      .def_readwrite("covariate_names", &Dataset::covariate_names)
      .def_readwrite("outcome_name", &Dataset::outcome_name)
      .def_readwrite("treatment_name", &Dataset::treatment_name)
      .def("__len__", &Dataset::size);

  py::class_<FixedBandwidth>(m, "FixedBandwidth")
      .def(py::init<>())
      .def(py::init([](double left, double right) {
             return FixedBandwidth{left, right};
           }),
           py::arg("left"), py::arg("right"))
      .def_readwrite("left", &FixedBandwidth::left)
      .def_readwrite("right", &FixedBandwidth::right);

  py::class_<DesignSpec>(m, "DesignSpec")
      .def(py::init<>())
      .def_readwrite("kind", &DesignSpec::kind)
      .def_readwrite("q", &DesignSpec::q)
      .def_readwrite("p", &DesignSpec::p)
      .def_readwrite("kernel", &DesignSpec::kernel)
      .def_readwrite("bandwidth", &DesignSpec::bandwidth)
      .def_readwrite("use_covariates", &DesignSpec::use_covariates)
      .def_readwrite("alpha", &DesignSpec::alpha)
      .def("validate", &DesignSpec::validate);

  py::class_<FitSide>(m, "FitSide")
      .def_readonly("side", &FitSide::side)
      .def_readonly("coefficients", &FitSide::coefficients)
      .def_readonly("n_effective", &FitSide::n_effective)
      .def_readonly("bandwidth", &FitSide::bandwidth);

  py::class_<EstimateResult>(m, "EstimateResult")
      .def_readonly("tau", &EstimateResult::tau)
      .def_readonly("bias", &EstimateResult::bias)
      .def_readonly("se_conventional", &EstimateResult::se_conventional)
      .def_readonly("se_robust", &EstimateResult::se_robust)
      .def_readonly("ci_low", &EstimateResult::ci_low)
      .def_readonly("ci_high", &EstimateResult::ci_high)
      .def_readonly("p_value", &EstimateResult::p_value)
      .def_readonly("h_left", &EstimateResult::h_left)
      .def_readonly("h_right", &EstimateResult::h_right)
      .def_readonly("n_left", &EstimateResult::n_left)
      .def_readonly("n_right", &EstimateResult::n_right)
      .def_readonly("first_stage_jump", &EstimateResult::first_stage_jump)
      .def("__repr__", [](const EstimateResult& r) {
        return "<EstimateResult tau=" + std::to_string(r.tau) + " ci=[" +
               std::to_string(r.ci_low) + ", " + std::to_string(r.ci_high) + "]>";
      });

  py::class_<InferenceConfig>(m, "InferenceConfig")
      .def(py::init<>())
      .def_readwrite("bias_order_increment", &InferenceConfig::bias_order_increment)
      .def_readwrite("variance_estimator", &InferenceConfig::variance_estimator)
      .def_readwrite("nn_neighbors", &InferenceConfig::nn_neighbors)
      .def_readwrite("use_survey_weights", &InferenceConfig::use_survey_weights)
      .def_readwrite("first_stage_floor", &InferenceConfig::first_stage_floor)
      .def_readwrite("per_side_bandwidths", &InferenceConfig::per_side_bandwidths);

  py::class_<VarianceEstimate>(m, "VarianceEstimate")
      .def_readonly("conventional", &VarianceEstimate::conventional)
      .def_readonly("robust", &VarianceEstimate::robust);

  py::class_<Interval>(m, "Interval")
      .def_readonly("low", &Interval::low)
      .def_readonly("high", &Interval::high)
      .def_readonly("p_value", &Interval::p_value);

  py::class_<JumpComponents>(m, "JumpComponents")
      .def_readonly("y_right", &JumpComponents::y_right)
      .def_readonly("y_left", &JumpComponents::y_left)
      .def_readonly("x_right", &JumpComponents::x_right)
      .def_readonly("x_left", &JumpComponents::x_left);

  py::class_<PointEstimate>(m, "PointEstimate")
      .def_readonly("tau", &PointEstimate::tau)
      .def_readonly("components", &PointEstimate::components)
      .def_readonly("n_left", &PointEstimate::n_left)
      .def_readonly("n_right", &PointEstimate::n_right);

  py::class_<DgpSpec>(m, "DgpSpec")
      .def(py::init<>())
      .def_readwrite("baseline", &DgpSpec::baseline)
      .def_readwrite("jump", &DgpSpec::jump)
      .def_readwrite("kink", &DgpSpec::kink)
      .def_readwrite("compliance_left", &DgpSpec::compliance_left)
      .def_readwrite("compliance_right", &DgpSpec::compliance_right)
      .def_readwrite("treatment_effect", &DgpSpec::treatment_effect)
      .def_readwrite("noise_sd", &DgpSpec::noise_sd)
      .def_readwrite("z_low", &DgpSpec::z_low)
      .def_readwrite("z_high", &DgpSpec::z_high)
      .def_readwrite("n", &DgpSpec::n)
      .def_readwrite("seed", &DgpSpec::seed)
      .def_readwrite("binary_outcome", &DgpSpec::binary_outcome)
      .def("sharp_truth", &DgpSpec::sharp_truth, py::arg("q"))
      .def("fuzzy_truth", &DgpSpec::fuzzy_truth);

  py::class_<McReport>(m, "McReport")
      .def_readonly("replications", &McReport::replications)
      .def_readonly("failures", &McReport::failures)
      .def_readonly("truth", &McReport::truth)
      .def_readonly("mean_tau", &McReport::mean_tau)
      .def_readonly("bias", &McReport::bias)
      .def_readonly("rmse", &McReport::rmse)
      .def_readonly("coverage", &McReport::coverage)
      .def_readonly("mean_ci_length", &McReport::mean_ci_length);

  py::class_<HouseholdRow>(m, "HouseholdRow")
      .def(py::init<>())
      .def_readwrite("household_id", &HouseholdRow::household_id)
      .def_readwrite("head_age", &HouseholdRow::head_age)
      .def_readwrite("head_sex", &HouseholdRow::head_sex)
      .def_readwrite("head_inactive", &HouseholdRow::head_inactive)
      .def_readwrite("pami", &HouseholdRow::pami)
      .def_readwrite("any_insurance", &HouseholdRow::any_insurance)
      .def_readwrite("voluntary", &HouseholdRow::voluntary)
      .def_readwrite("multiple", &HouseholdRow::multiple)
      .def_readwrite("expansion_factor", &HouseholdRow::expansion_factor)
      .def_readwrite("total_spend_pc", &HouseholdRow::total_spend_pc)
      .def_readwrite("health_spend_pc", &HouseholdRow::health_spend_pc)
      .def_readwrite("pharma", &HouseholdRow::pharma)
      .def_readwrite("medical_services", &HouseholdRow::medical_services)
      .def_readwrite("dental", &HouseholdRow::dental)
      .def_readwrite("equipment", &HouseholdRow::equipment);

  py::class_<DerivedIndicators>(m, "DerivedIndicators")
      .def_readonly("gbs_share", &DerivedIndicators::gbs_share)
      .def_readonly("cat10", &DerivedIndicators::cat10)
      .def_readonly("cat25", &DerivedIndicators::cat25)
      .def_readonly("lgasto", &DerivedIndicators::lgasto)
      .def_readonly("lgsalud", &DerivedIndicators::lgsalud);

  py::class_<IngestReport>(m, "IngestReport")
      .def_readonly("rows_read", &IngestReport::rows_read)
      .def_readonly("rows_kept", &IngestReport::rows_kept)
      .def_readonly("rows_dropped", &IngestReport::rows_dropped)
      .def_readonly("drop_reasons", &IngestReport::drop_reasons)
      .def_readonly("outcome_missing", &IngestReport::outcome_missing)
      .def_readonly("outcome", &IngestReport::outcome)
      .def("reconciles", &IngestReport::reconciles);

  py::class_<SummaryRow>(m, "SummaryRow")
      .def_readonly("name", &SummaryRow::name)
      .def_readonly("n", &SummaryRow::n)
      .def_readonly("mean", &SummaryRow::mean)
      .def_readonly("sd", &SummaryRow::sd);

  py::class_<SurveySchema>(m, "SurveySchema")
      .def(py::init<>())
      .def_readwrite("columns", &SurveySchema::columns)
      .def_readwrite("delimiter", &SurveySchema::delimiter);

  m.def("dataset_from_arrays", &dataset_from_arrays, py::arg("z"), py::arg("y"),
        py::arg("x") = std::vector<double>{},
        py::arg("weight") = std::vector<double>{},
        py::arg("covariates") = std::vector<std::vector<double>>{},
        py::arg("covariate_names") = std::vector<std::string>{},
        py::arg("cutoff") = 0.0);
  m.def("validate_dataset", &validate_dataset, py::arg("data"));
  m.def("kernel_weight", &kernel_weight, py::arg("kernel"), py::arg("z"),
        py::arg("center"), py::arg("h"));
  m.def("weighted_polyfit", &polyfit_arrays, py::arg("z"), py::arg("y"),
        py::arg("w") = std::vector<double>{}, py::arg("center") = 0.0,
        py::arg("order") = 1);
  m.def("fit_side", &fit_side, py::arg("data"), py::arg("spec"), py::arg("var"),
        py::arg("side"), py::arg("h"), py::arg("use_survey_weights") = false);
  m.def("sharp_estimate", &sharp_estimate, py::arg("data"), py::arg("spec"),
        py::arg("h_left"), py::arg("h_right"), py::arg("use_survey_weights") = false);
  m.def("fuzzy_estimate", &fuzzy_estimate, py::arg("data"), py::arg("spec"),
        py::arg("h_left"), py::arg("h_right"), py::arg("use_survey_weights") = false,
        py::arg("first_stage_floor") = 1e-6);
  m.def("covariate_adjust", &covariate_adjust, py::arg("data"), py::arg("spec"),
        py::arg("h_left"), py::arg("h_right"), py::arg("use_survey_weights") = false);
  m.def("bandwidth_formula", &bandwidth_formula, py::arg("v"), py::arg("b"),
        py::arg("p"), py::arg("q"), py::arg("n"));
  m.def("select_bandwidth", &select_bandwidth, py::arg("data"), py::arg("spec"),
        py::arg("side") = BandwidthSide::Pooled,
        py::arg("config") = InferenceConfig{});
  m.def("estimate_bias", &estimate_bias, py::arg("data"), py::arg("spec"),
        py::arg("h_left"), py::arg("h_right"), py::arg("config") = InferenceConfig{});
  m.def("estimate_variance", &estimate_variance, py::arg("data"), py::arg("spec"),
        py::arg("h_left"), py::arg("h_right"), py::arg("config") = InferenceConfig{});
  m.def("rbc_interval", &rbc_interval, py::arg("tau"), py::arg("bias"),
        py::arg("v_robust"), py::arg("alpha") = 0.05);
  m.def("run_design", &run_design, py::arg("data"), py::arg("spec"),
        py::arg("config") = InferenceConfig{});
  m.def("star_label", &star_label, py::arg("p_value"));
  m.def("normal_cdf", &normal_cdf, py::arg("x"));
  m.def("normal_quantile", &normal_quantile, py::arg("prob"));
  m.def("generate", &generate, py::arg("spec"));
  m.def("run_monte_carlo", &run_monte_carlo, py::arg("dgp"), py::arg("design"),
        py::arg("config") = InferenceConfig{}, py::arg("replications") = 100,
        py::arg("threads") = 0);
  m.def("standard_sharp_dgp", &standard_sharp_dgp);
  m.def("standard_fuzzy_dgp", &standard_fuzzy_dgp);
  m.def("binary_fuzzy_dgp", &binary_fuzzy_dgp);
  m.def("running_variable", &running_variable, py::arg("age"), py::arg("sex"));
  m.def("derive_indicators", &derive_indicators, py::arg("row"));
  m.def("default_schema", &default_schema);
  m.def("known_variables", []() { return known_variables(); });
  m.def("load_survey", &load_survey, py::arg("path"), py::arg("schema"),
        py::arg("outcome"), py::arg("treatment") = "pami",
        py::arg("covariates") = std::vector<std::string>{"sexo", "inac"});
  m.def("descriptive_table", &descriptive_table, py::arg("data"));
  m.def("write_dataset", &write_dataset, py::arg("data"), py::arg("stem"),
        py::arg("source_hash") = "");
  m.def("read_dataset", &read_dataset, py::arg("stem"));
  m.def("fnv1a64_hex", [](const std::string& s) { return fnv1a64_hex(s); },
        py::arg("data"));

  m.attr("__version__") = "0.1.0";
}
