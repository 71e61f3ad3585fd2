#include "rdlocal/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rdlocal/dataset_io.hpp"
#include "rdlocal/local_poly.hpp"

namespace rdlocal {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& ctx, const std::string& key,
                          const std::string& why) {
  throw config_error("config: " + ctx + "." + key + " " + why);
}

const json* find(const json& j, const std::string& key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

template <typename T>
T get_as(const json& j, const std::string& ctx, const std::string& key,
         const char* type_name) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    bad_key(ctx, key, std::string("must be ") + type_name);
  }
}

std::string need_string(const json& j, const std::string& ctx, const std::string& key) {
  const json* v = find(j, key);
  if (!v) bad_key(ctx, key, "is required");
  return get_as<std::string>(*v, ctx, key, "a string");
}

std::string opt_string(const json& j, const std::string& ctx, const std::string& key,
                       const std::string& fallback) {
  const json* v = find(j, key);
  return v ? get_as<std::string>(*v, ctx, key, "a string") : fallback;
}

double opt_double(const json& j, const std::string& ctx, const std::string& key,
                  double fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number()) bad_key(ctx, key, "must be a number");
  return v->get<double>();
}

int opt_int(const json& j, const std::string& ctx, const std::string& key,
            int fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) bad_key(ctx, key, "must be an integer");
  return v->get<int>();
}

bool opt_bool(const json& j, const std::string& ctx, const std::string& key,
              bool fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_boolean()) bad_key(ctx, key, "must be a boolean");
  return v->get<bool>();
}

std::vector<std::string> string_list(const json& v, const std::string& ctx,
                                     const std::string& key) {
  if (!v.is_array()) bad_key(ctx, key, "must be an array of strings");
  std::vector<std::string> out;
  for (const json& e : v) {
    if (!e.is_string()) bad_key(ctx, key, "must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

DesignKind parse_kind(const std::string& s, const std::string& ctx) {
  if (s == "sharp") return DesignKind::Sharp;
  if (s == "fuzzy") return DesignKind::Fuzzy;
  bad_key(ctx, "kind", "must be 'sharp' or 'fuzzy', got '" + s + "'");
}

KernelKind parse_kernel(const std::string& s, const std::string& ctx) {
  if (s == "triangular") return KernelKind::Triangular;
  if (s == "uniform") return KernelKind::Uniform;
  bad_key(ctx, "kernel", "must be 'triangular' or 'uniform', got '" + s + "'");
}

VarianceEstimator parse_variance(const std::string& s, const std::string& ctx) {
  if (s == "nn" || s == "nearest_neighbor") return VarianceEstimator::NearestNeighbor;
  if (s == "hc" || s == "hc_plugin") return VarianceEstimator::HCPlugin;
  bad_key(ctx, "variance", "must be 'nn' or 'hc', got '" + s + "'");
}

std::optional<FixedBandwidth> parse_bandwidth(const json& j, const std::string& ctx) {
  const json* v = find(j, "bandwidth");
  if (!v) return std::nullopt;
  if (v->is_string()) {
    if (v->get<std::string>() == "auto") return std::nullopt;
    bad_key(ctx, "bandwidth", "string form must be 'auto'");
  }
  if (v->is_number()) {
    const double h = v->get<double>();
    return FixedBandwidth{h, h};
  }
  if (v->is_object()) {
    FixedBandwidth bw;
    bw.left = opt_double(*v, ctx + ".bandwidth", "left", -1.0);
    bw.right = opt_double(*v, ctx + ".bandwidth", "right", -1.0);
    if (bw.left <= 0.0 || bw.right <= 0.0)
      bad_key(ctx, "bandwidth", "object form needs positive 'left' and 'right'");
    return bw;
  }
  bad_key(ctx, "bandwidth", "must be 'auto', a number, or {left, right}");
}

InferenceConfig parse_inference(const json& j, const std::string& ctx) {
  InferenceConfig cfg;
  cfg.bias_order_increment = opt_int(j, ctx, "bias_order_increment", 1);
  if (const json* v = find(j, "variance"))
    cfg.variance_estimator =
        parse_variance(get_as<std::string>(*v, ctx, "variance", "a string"), ctx);
  cfg.nn_neighbors = opt_int(j, ctx, "nn_neighbors", 3);
  cfg.use_survey_weights = opt_bool(j, ctx, "survey_weights", false);
  cfg.first_stage_floor = opt_double(j, ctx, "first_stage_floor", 1e-6);
  cfg.per_side_bandwidths = opt_bool(j, ctx, "per_side_bandwidths", false);
  return cfg;
}

DgpSpec parse_dgp(const json& j, const std::string& ctx) {
  DgpSpec spec;
  if (const json* v = find(j, "preset")) {
    const std::string name = get_as<std::string>(*v, ctx, "preset", "a string");
    if (name == "standard_sharp")
      spec = standard_sharp_dgp();
    else if (name == "standard_fuzzy")
      spec = standard_fuzzy_dgp();
    else if (name == "binary_fuzzy")
      spec = binary_fuzzy_dgp();
    else
      bad_key(ctx, "preset",
              "must be 'standard_sharp', 'standard_fuzzy' or 'binary_fuzzy'");
  }
  if (const json* v = find(j, "baseline")) {
    if (!v->is_array() || v->empty()) bad_key(ctx, "baseline", "must be a number array");
    spec.baseline.clear();
    for (const json& e : *v) {
      if (!e.is_number()) bad_key(ctx, "baseline", "must be a number array");
      spec.baseline.push_back(e.get<double>());
    }
  }
  spec.jump = opt_double(j, ctx, "jump", spec.jump);
  spec.kink = opt_double(j, ctx, "kink", spec.kink);
  spec.compliance_left = opt_double(j, ctx, "compliance_left", spec.compliance_left);
  spec.compliance_right = opt_double(j, ctx, "compliance_right", spec.compliance_right);
  spec.treatment_effect = opt_double(j, ctx, "treatment_effect", spec.treatment_effect);
  spec.noise_sd = opt_double(j, ctx, "noise_sd", spec.noise_sd);
  if (const json* v = find(j, "z_range")) {
    if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() ||
        !(*v)[1].is_number())
      bad_key(ctx, "z_range", "must be [low, high]");
    spec.z_low = (*v)[0].get<double>();
    spec.z_high = (*v)[1].get<double>();
  }
  spec.n = opt_int(j, ctx, "n", spec.n);
  if (const json* v = find(j, "seed")) {
    if (!v->is_number_unsigned() && !v->is_number_integer())
      bad_key(ctx, "seed", "must be a nonnegative integer");
    spec.seed = v->get<std::uint64_t>();
  }
  spec.binary_outcome = opt_bool(j, ctx, "binary_outcome", spec.binary_outcome);
  return spec;
}

DesignSpec parse_design(const json& j, const std::string& ctx) {
  DesignSpec spec;
  spec.kind = parse_kind(opt_string(j, ctx, "kind", "sharp"), ctx);
  spec.p = opt_int(j, ctx, "p", 1);
  spec.q = opt_int(j, ctx, "q", 0);
  spec.kernel = parse_kernel(opt_string(j, ctx, "kernel", "triangular"), ctx);
  spec.bandwidth = parse_bandwidth(j, ctx);
  spec.use_covariates = opt_bool(j, ctx, "covariates", false);
  spec.alpha = opt_double(j, ctx, "alpha", 0.05);
  return spec;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path);
  out << body;
  out.close();
  if (!out) throw io_error("failed writing " + path);
}

std::string pad(const std::string& s, std::size_t width) {
  if (s.size() >= width) return s + " ";
  return s + std::string(width - s.size(), ' ');
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("config: cannot open " + path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw config_error("config: " + path + " is not valid JSON: " + e.what());
  }
  if (!root.is_object()) throw config_error("config: top level must be an object");

  RunConfig cfg;
  if (const json* j = find(root, "ingest")) {
    const std::string ctx = "ingest";
    IngestConfig ic;
    ic.survey = need_string(*j, ctx, "survey");
    if (const json* v = find(*j, "outcomes"))
      ic.outcomes = string_list(*v, ctx, "outcomes");
    if (ic.outcomes.empty()) bad_key(ctx, "outcomes", "must be a nonempty array");
    ic.treatment = opt_string(*j, ctx, "treatment", ic.treatment);
    if (const json* v = find(*j, "covariates"))
      ic.covariates = string_list(*v, ctx, "covariates");
    ic.output_stem = opt_string(*j, ctx, "output_stem", ic.output_stem);
    if (const json* v = find(*j, "schema")) {
      const std::string sctx = ctx + ".schema";
      if (!v->is_object()) bad_key(ctx, "schema", "must be an object");
      if (const json* cols = find(*v, "columns")) {
        if (!cols->is_object()) bad_key(sctx, "columns", "must be an object");
        for (const auto& [field, col] : cols->items()) {
          if (!col.is_string()) bad_key(sctx, "columns", "values must be strings");
          ic.schema.columns[field] = col.get<std::string>();
        }
      }
      const std::string delim = opt_string(*v, sctx, "delimiter", ",");
      if (delim.size() != 1) bad_key(sctx, "delimiter", "must be one character");
      ic.schema.delimiter = delim[0];
    }
    for (const std::string& name : ic.outcomes)
      if (std::find(known_variables().begin(), known_variables().end(), name) ==
          known_variables().end())
        bad_key(ctx, "outcomes", "contains unknown variable '" + name + "'");
    cfg.ingest = std::move(ic);
  }

  if (const json* j = find(root, "estimate")) {
    const std::string ctx = "estimate";
    EstimateConfig ec;
    ec.dataset_stem = need_string(*j, ctx, "dataset_stem");
    const json* grid = find(*j, "grid");
    if (!grid || !grid->is_array() || grid->empty())
      bad_key(ctx, "grid", "must be a nonempty array of cells");
    for (std::size_t i = 0; i < grid->size(); ++i) {
      const json& c = (*grid)[i];
      const std::string cctx = ctx + ".grid[" + std::to_string(i) + "]";
      if (!c.is_object()) throw config_error("config: " + cctx + " must be an object");
      GridCell cell;
      cell.outcome = need_string(c, cctx, "outcome");
      cell.kind = parse_kind(opt_string(c, cctx, "kind", "sharp"), cctx);
      cell.p = opt_int(c, cctx, "p", 1);
      cell.q = opt_int(c, cctx, "q", 0);
      cell.covariates = opt_bool(c, cctx, "covariates", false);
      ec.grid.push_back(std::move(cell));
    }
    ec.bandwidth = parse_bandwidth(*j, ctx);
    ec.alpha = opt_double(*j, ctx, "alpha", 0.05);
    ec.kernel = parse_kernel(opt_string(*j, ctx, "kernel", "triangular"), ctx);
    ec.inference = parse_inference(*j, ctx);
    cfg.estimate = std::move(ec);
  }

  if (const json* j = find(root, "simulate")) {
    const std::string ctx = "simulate";
    SimulateConfig sc;
    const json* dgp = find(*j, "dgp");
    if (!dgp || !dgp->is_object()) bad_key(ctx, "dgp", "must be an object");
    sc.dgp = parse_dgp(*dgp, ctx + ".dgp");
    if (const json* v = find(*j, "design")) {
      if (!v->is_object()) bad_key(ctx, "design", "must be an object");
      sc.design = parse_design(*v, ctx + ".design");
    }
    sc.inference = parse_inference(*j, ctx);
    sc.replications = opt_int(*j, ctx, "replications", 1000);
    sc.threads = opt_int(*j, ctx, "threads", 0);
    if (sc.replications < 1) bad_key(ctx, "replications", "must be at least 1");
    cfg.simulate = std::move(sc);
  }

  if (const json* j = find(root, "plotdata")) {
    const std::string ctx = "plotdata";
    PlotConfig pc;
    pc.dataset_stem = need_string(*j, ctx, "dataset_stem");
    if (const json* v = find(*j, "outcomes"))
      pc.outcomes = string_list(*v, ctx, "outcomes");
    if (pc.outcomes.empty()) bad_key(ctx, "outcomes", "must be a nonempty array");
    pc.p = opt_int(*j, ctx, "p", 1);
    pc.bandwidth = parse_bandwidth(*j, ctx);
    pc.kernel = parse_kernel(opt_string(*j, ctx, "kernel", "triangular"), ctx);
    pc.grid_points = opt_int(*j, ctx, "grid_points", 41);
    pc.bins = opt_int(*j, ctx, "bins", 20);
    pc.use_survey_weights = opt_bool(*j, ctx, "survey_weights", false);
    if (pc.grid_points < 2) bad_key(ctx, "grid_points", "must be at least 2");
    if (pc.bins < 1) bad_key(ctx, "bins", "must be at least 1");
    cfg.plotdata = std::move(pc);
  }

  return cfg;
}

int cmd_ingest(const RunConfig& config, const std::string& out_dir, std::ostream& out,
               std::ostream& err) {
  try {
    if (!config.ingest)
      throw config_error("cmd_ingest: run configuration has no 'ingest' section");
    const IngestConfig& ic = *config.ingest;
    std::filesystem::create_directories(out_dir);

    const SurveyFrame frame = load_survey_rows(ic.survey, ic.schema);
    if (!frame.report.reconciles())
      throw io_error("cmd_ingest: row accounting does not reconcile");

    json report;
    report["survey"] = ic.survey;
    report["source_hash"] = frame.source_hash;
    report["rows_read"] = frame.report.rows_read;
    report["rows_kept"] = frame.report.rows_kept;
    report["rows_dropped"] = frame.report.rows_dropped;
    report["reconciles"] = frame.report.reconciles();
    report["drop_reasons"] = json::object();
    for (const auto& [reason, count] : frame.report.drop_reasons)
      report["drop_reasons"][reason] = count;

    std::ostringstream text;
    text << "survey ingestion report\n";
    text << "  source: " << ic.survey << " (fnv1a64 " << frame.source_hash << ")\n";
    text << "  rows read:    " << frame.report.rows_read << "\n";
    text << "  rows kept:    " << frame.report.rows_kept << "\n";
    text << "  rows dropped: " << frame.report.rows_dropped << "\n";
    for (const auto& [reason, count] : frame.report.drop_reasons)
      text << "    " << pad(reason, 32) << count << "\n";

    report["outcomes"] = json::array();
    for (const std::string& outcome : ic.outcomes) {
      IngestReport rep = frame.report;
      const Dataset data =
          dataset_from_rows(frame.rows, outcome, ic.treatment, ic.covariates, &rep);
      const std::string stem =
          (std::filesystem::path(out_dir) / (ic.output_stem + "__" + outcome)).string();
      write_dataset(data, stem, frame.source_hash);

      json oj;
      oj["outcome"] = outcome;
      oj["n"] = data.observations.size();
      oj["missing"] = rep.outcome_missing;
      oj["file"] = stem + ".csv";
      report["outcomes"].push_back(oj);

      text << "\noutcome " << outcome << ": n=" << data.observations.size()
           << ", excluded for missing values: " << rep.outcome_missing << "\n";
      if (!data.observations.empty()) {
        text << "  " << pad("variable", 18) << pad("n", 8) << pad("w.mean", 12)
             << "w.sd\n";
        for (const SummaryRow& row : descriptive_table(data))
          text << "  " << pad(row.name, 18) << pad(std::to_string(row.n), 8)
               << pad(fmt3(row.mean), 12) << fmt3(row.sd) << "\n";
      }
    }

    const std::filesystem::path dir(out_dir);
    write_text_file((dir / "ingest_report.json").string(), report.dump(2) + "\n");
    write_text_file((dir / "ingest_report.txt").string(), text.str());
    out << text.str();
    out << "\nwrote " << (dir / "ingest_report.json").string() << "\n";
    return 0;
  } catch (const config_error& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const schema_error& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const error& e) {
    err << e.what() << "\n";
    return 1;
  }
}

namespace {

std::string kind_name(DesignKind k) {
  return k == DesignKind::Sharp ? "sharp" : "fuzzy";
}

}  // namespace

int cmd_estimate(const RunConfig& config, const std::string& out_dir,
                 const CliOverrides& overrides, std::ostream& out, std::ostream& err) {
  try {
    if (!config.estimate)
      throw config_error("cmd_estimate: run configuration has no 'estimate' section");
    const EstimateConfig& ec = *config.estimate;
    std::filesystem::create_directories(out_dir);

    InferenceConfig inference = ec.inference;
    if (overrides.survey_weights) inference.use_survey_weights = *overrides.survey_weights;

    std::map<std::string, Dataset> cache;
    auto dataset_for = [&](const std::string& outcome) -> const Dataset& {
      auto it = cache.find(outcome);
      if (it == cache.end())
        it = cache.emplace(outcome, read_dataset(ec.dataset_stem + "__" + outcome))
                 .first;
      return it->second;
    };

    std::ostringstream mcsv, btxt, bcsv;
    mcsv << "outcome,kind,p,q,covariates,tau,bias,se_conventional,se_robust,ci_low,"
            "ci_high,p_value,stars,h_left,h_right,n_left,n_right,first_stage,error\n";
    bcsv << "outcome,kind,p,q,covariates,h_left,h_right\n";
    btxt << "bandwidths by grid cell\n"
         << pad("outcome", 18) << pad("kind", 6) << pad("p", 2) << pad("q", 2)
         << pad("cov", 4) << pad("h left", 12) << "h right\n";

    std::ostringstream text;
    text << pad("outcome", 18) << pad("kind", 6) << pad("p", 2) << pad("q", 2)
         << pad("cov", 4) << pad("estimate", 14) << pad("robust ci", 22)
         << pad("p-value", 10) << pad("h (l/r)", 16) << pad("n (l/r)", 14)
         << "first stage\n";

    int failed = 0;
    for (const GridCell& cell : ec.grid) {
      DesignSpec spec;
      spec.kind = cell.kind;
      spec.p = cell.p;
      spec.q = cell.q;
      spec.kernel = ec.kernel;
      spec.bandwidth = ec.bandwidth;
      spec.use_covariates = cell.covariates;
      spec.alpha = ec.alpha;

      const std::string row_id = cell.outcome + "," + kind_name(cell.kind) + "," +
                                 std::to_string(cell.p) + "," + std::to_string(cell.q) +
                                 "," + (cell.covariates ? "yes" : "no");
      try {
        const Dataset& data = dataset_for(cell.outcome);
        const EstimateResult res = run_design(data, spec, inference);
        const std::string stars = star_label(res.p_value);
        mcsv << row_id << ',' << fmt17(res.tau) << ',' << fmt17(res.bias) << ','
             << fmt17(res.se_conventional) << ',' << fmt17(res.se_robust) << ','
             << fmt17(res.ci_low) << ',' << fmt17(res.ci_high) << ','
             << fmt17(res.p_value) << ',' << csv_quote(stars) << ','
             << fmt17(res.h_left) << ',' << fmt17(res.h_right) << ',' << res.n_left
             << ',' << res.n_right << ','
             << (res.first_stage_jump ? fmt17(*res.first_stage_jump) : std::string())
             << ",\n";
        bcsv << row_id << ',' << fmt17(res.h_left) << ',' << fmt17(res.h_right)
             << '\n';
        btxt << pad(cell.outcome, 18) << pad(kind_name(cell.kind), 6)
             << pad(std::to_string(cell.p), 2) << pad(std::to_string(cell.q), 2)
             << pad(cell.covariates ? "yes" : "no", 4) << pad(fmt3(res.h_left), 12)
             << fmt3(res.h_right) << "\n";

        text << pad(cell.outcome, 18) << pad(kind_name(cell.kind), 6)
             << pad(std::to_string(cell.p), 2) << pad(std::to_string(cell.q), 2)
             << pad(cell.covariates ? "yes" : "no", 4)
             << pad(fmt3(res.tau) + stars, 14)
             << pad("[" + fmt3(res.ci_low) + ", " + fmt3(res.ci_high) + "]", 22)
             << pad(fmt3(res.p_value), 10)
             << pad(fmt3(res.h_left) + "/" + fmt3(res.h_right), 16)
             << pad(std::to_string(res.n_left) + "/" + std::to_string(res.n_right), 14)
             << (res.first_stage_jump ? fmt3(*res.first_stage_jump) : std::string("-"))
             << "\n";
      } catch (const error& e) {
        ++failed;
        mcsv << row_id << ",,,,,,,,,,,,,," << csv_quote(e.what()) << "\n";
        bcsv << row_id << ",,\n";
        btxt << pad(cell.outcome, 18) << pad(kind_name(cell.kind), 6)
             << pad(std::to_string(cell.p), 2) << pad(std::to_string(cell.q), 2)
             << pad(cell.covariates ? "yes" : "no", 4) << "error\n";
        text << pad(cell.outcome, 18) << pad(kind_name(cell.kind), 6)
             << pad(std::to_string(cell.p), 2) << pad(std::to_string(cell.q), 2)
             << pad(cell.covariates ? "yes" : "no", 4) << "error: " << e.what()
             << "\n";
      }
    }

    const std::filesystem::path dir(out_dir);
    write_text_file((dir / "results.csv").string(), mcsv.str());
    write_text_file((dir / "results.txt").string(), text.str());
    write_text_file((dir / "bandwidths.csv").string(), bcsv.str());
    write_text_file((dir / "bandwidths.txt").string(), btxt.str());
    out << text.str();
    out << "\nwrote " << (dir / "results.csv").string() << "\n";
    if (failed > 0) {
      err << "cmd_estimate: " << failed << " of " << ec.grid.size()
          << " grid cells failed\n";
      return 1;
    }
    return 0;
  } catch (const config_error& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const schema_error& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const error& e) {
    err << e.what() << "\n";
    return 1;
  }
}

int cmd_simulate(const RunConfig& config, const std::string& out_dir,
                 const CliOverrides& overrides, std::ostream& out, std::ostream& err) {
  try {
    if (!config.simulate)
      throw config_error("cmd_simulate: run configuration has no 'simulate' section");
    SimulateConfig sc = *config.simulate;
    if (overrides.seed) sc.dgp.seed = *overrides.seed;
    if (overrides.survey_weights)
      sc.inference.use_survey_weights = *overrides.survey_weights;
    std::filesystem::create_directories(out_dir);

    const McReport report =
        run_monte_carlo(sc.dgp, sc.design, sc.inference, sc.replications, sc.threads);

    json rj;
    rj["replications"] = report.replications;
    rj["failures"] = report.failures;
    rj["truth"] = report.truth;
    rj["mean_tau"] = report.mean_tau;
    rj["bias"] = report.bias;
    rj["rmse"] = report.rmse;
    rj["coverage"] = report.coverage;
    rj["mean_ci_length"] = report.mean_ci_length;
    rj["seed"] = sc.dgp.seed;
    rj["n"] = sc.dgp.n;
    rj["design"] = {{"kind", kind_name(sc.design.kind)},
                    {"p", sc.design.p},
                    {"q", sc.design.q}};

    std::ostringstream text;
    text << "monte carlo report\n";
    text << "  replications:   " << report.replications << " (failures "
         << report.failures << ")\n";
    text << "  truth:          " << fmt3(report.truth) << "\n";
    text << "  mean estimate:  " << fmt3(report.mean_tau) << "\n";
    text << "  bias:           " << fmt3(report.bias) << "\n";
    text << "  rmse:           " << fmt3(report.rmse) << "\n";
    text << "  coverage:       " << fmt3(report.coverage) << "\n";
    text << "  mean ci length: " << fmt3(report.mean_ci_length) << "\n";

    const std::filesystem::path dir(out_dir);
    write_text_file((dir / "mcreport.json").string(), rj.dump(2) + "\n");
    write_text_file((dir / "mcreport.txt").string(), text.str());
    out << text.str();
    out << "wrote " << (dir / "mcreport.json").string() << "\n";
    return 0;
  } catch (const config_error& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const error& e) {
    err << e.what() << "\n";
    return 1;
  }
}

int cmd_plotdata(const RunConfig& config, const std::string& out_dir,
                 const CliOverrides& overrides, std::ostream& out, std::ostream& err) {
  try {
    if (!config.plotdata)
      throw config_error("cmd_plotdata: run configuration has no 'plotdata' section");
    PlotConfig pc = *config.plotdata;
    if (overrides.survey_weights) pc.use_survey_weights = *overrides.survey_weights;
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);

    int failed = 0;
    for (const std::string& outcome : pc.outcomes) {
      try {
        const Dataset data = read_dataset(pc.dataset_stem + "__" + outcome);
        DesignSpec spec;
        spec.p = pc.p;
        spec.q = 0;
        spec.kernel = pc.kernel;
        spec.bandwidth = pc.bandwidth;

        InferenceConfig inference;
        inference.use_survey_weights = pc.use_survey_weights;
        double h_left, h_right;
        if (pc.bandwidth) {
          h_left = pc.bandwidth->left;
          h_right = pc.bandwidth->right;
        } else {
          h_left = h_right =
              select_bandwidth(data, spec, BandwidthSide::Pooled, inference);
        }

        std::ostringstream csv;
        csv << "z,value,series,side\n";

        // Binned outcome means, equal-width bins per side over observed z.
        for (Side side : {Side::Left, Side::Right}) {
          double lo = data.cutoff, hi = data.cutoff;
          bool any = false;
          for (const Observation& obs : data.observations) {
            if (side_of(obs.z, data.cutoff) != side) continue;
            if (!any) {
              lo = hi = obs.z;
              any = true;
            } else {
              lo = std::min(lo, obs.z);
              hi = std::max(hi, obs.z);
            }
          }
          if (!any) continue;
          const double width = (hi - lo) / pc.bins;
          std::vector<double> wsum(static_cast<std::size_t>(pc.bins), 0.0);
          std::vector<double> vsum(static_cast<std::size_t>(pc.bins), 0.0);
          for (const Observation& obs : data.observations) {
            if (side_of(obs.z, data.cutoff) != side) continue;
            int b = width > 0.0 ? static_cast<int>((obs.z - lo) / width) : 0;
            b = std::clamp(b, 0, pc.bins - 1);
            const double w = pc.use_survey_weights ? obs.weight : 1.0;
            wsum[static_cast<std::size_t>(b)] += w;
            vsum[static_cast<std::size_t>(b)] += w * obs.y;
          }
          for (int b = 0; b < pc.bins; ++b) {
            if (wsum[static_cast<std::size_t>(b)] <= 0.0) continue;
            const double center = lo + (b + 0.5) * width;
            csv << fmt17(center) << ','
                << fmt17(vsum[static_cast<std::size_t>(b)] /
                         wsum[static_cast<std::size_t>(b)])
                << ",binned," << (side == Side::Left ? "left" : "right") << '\n';
          }
        }

        // Fitted one-sided curves on an even grid across each window.
        for (Side side : {Side::Left, Side::Right}) {
          const double h = side == Side::Left ? h_left : h_right;
          const FitSide fit = fit_side(data, spec, FitVar::Outcome, side, h,
                                       pc.use_survey_weights);
          const double z0 = side == Side::Left ? data.cutoff - h : data.cutoff;
          const double z1 = side == Side::Left ? data.cutoff : data.cutoff + h;
          for (int g = 0; g < pc.grid_points; ++g) {
            const double z = z0 + (z1 - z0) * g / (pc.grid_points - 1);
            csv << fmt17(z) << ','
                << fmt17(polyval(fit.coefficients, z - data.cutoff)) << ",fit,"
                << (side == Side::Left ? "left" : "right") << '\n';
          }
        }

        const std::string path = (dir / ("plot_" + outcome + ".csv")).string();
        write_text_file(path, csv.str());
        out << "wrote " << path << "\n";
      } catch (const error& e) {
        ++failed;
        err << "plotdata " << outcome << ": " << e.what() << "\n";
      }
    }
    return failed == 0 ? 0 : 1;
  } catch (const config_error& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const error& e) {
    err << e.what() << "\n";
    return 1;
  }
}

}  // namespace rdlocal
