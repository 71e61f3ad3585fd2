#include "rdlocal/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rdlocal/dataset_io.hpp"

namespace rdlocal {

double running_variable(int age, Sex sex) {
  if (age < 18 || age > 110)
    throw parameter_error("running_variable: age must lie in [18, 110]");
  return static_cast<double>(age - (sex == Sex::Female ? 61 : 66));
}

DerivedIndicators derive_indicators(const HouseholdRow& row) {
  if (row.total_spend_pc < 0.0 || row.health_spend_pc < 0.0)
    throw parameter_error("derive_indicators: spending must be nonnegative");
  DerivedIndicators ind;
  if (row.total_spend_pc > 0.0) {
    ind.gbs_share = row.health_spend_pc / row.total_spend_pc;
    ind.lgasto = std::log(row.total_spend_pc);
  }
  ind.cat10 = ind.gbs_share > 0.10 ? 1 : 0;
  ind.cat25 = ind.gbs_share > 0.25 ? 1 : 0;
  if (row.health_spend_pc > 0.0) ind.lgsalud = std::log(row.health_spend_pc);
  return ind;
}

namespace {

const std::vector<std::string> kRequiredFields = {
    "household_id", "head_age",         "head_sex",       "head_inactive",
    "pami",         "any_insurance",    "voluntary",      "multiple",
    "expansion_factor", "total_spend_pc", "health_spend_pc"};

const std::vector<std::string> kFlagFields = {"pharma", "medical_services", "dental",
                                              "equipment"};

// RFC-4180 style: quoted fields may contain the delimiter and doubled quotes.
std::vector<std::string> split_csv_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

bool parse_double(const std::string& s, double* out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(v)) return false;
  *out = v;
  return true;
}

bool parse_int(const std::string& s, int* out) {
  double v;
  if (!parse_double(s, &v)) return false;
  if (v != std::floor(v) || std::abs(v) > 1e9) return false;
  *out = static_cast<int>(v);
  return true;
}

struct ColumnMap {
  // canonical field -> column index; flags may be absent (-1)
  std::map<std::string, int> index;
};

ColumnMap map_columns(const std::vector<std::string>& header,
                      const SurveySchema& schema) {
  ColumnMap cm;
  std::map<std::string, int> by_name;
  for (std::size_t i = 0; i < header.size(); ++i)
    by_name[trim(header[i])] = static_cast<int>(i);

  auto resolve = [&](const std::string& field) -> int {
    const auto it = schema.columns.find(field);
    const std::string column = it != schema.columns.end() ? it->second : field;
    const auto found = by_name.find(column);
    return found == by_name.end() ? -1 : found->second;
  };
  for (const std::string& field : kRequiredFields) {
    const int idx = resolve(field);
    if (idx < 0) {
      const auto it = schema.columns.find(field);
      const std::string column = it != schema.columns.end() ? it->second : field;
      throw schema_error("load_survey: required column '" + column +
                         "' (field " + field + ") not found in header");
    }
    cm.index[field] = idx;
  }
  for (const std::string& field : kFlagFields) cm.index[field] = resolve(field);
  return cm;
}

}  // namespace

SurveySchema default_schema() {
  SurveySchema schema;
  for (const std::string& f : kRequiredFields) schema.columns[f] = f;
  for (const std::string& f : kFlagFields) schema.columns[f] = f;
  return schema;
}

SurveyFrame load_survey_rows(const std::string& path, const SurveySchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("load_survey: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();

  SurveyFrame frame;
  frame.source_hash = fnv1a64_hex(bytes);

  std::istringstream stream(bytes);
  std::string line;
  if (!std::getline(stream, line))
    throw schema_error("load_survey: " + path + " is empty");
  const ColumnMap cm = map_columns(split_csv_line(trim(line), schema.delimiter), schema);

  auto drop = [&](std::size_t row, const std::string& reason) {
    ++frame.report.rows_dropped;
    ++frame.report.drop_reasons[reason];
    frame.report.dropped_rows.emplace_back(row, reason);
  };

  std::size_t row_no = 0;
  while (std::getline(stream, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    ++row_no;
    ++frame.report.rows_read;
    const std::vector<std::string> fields = split_csv_line(t, schema.delimiter);
    auto cell = [&](const std::string& field) -> std::string {
      const int idx = cm.index.at(field);
      if (idx < 0 || idx >= static_cast<int>(fields.size())) return "";
      return trim(fields[static_cast<std::size_t>(idx)]);
    };

    HouseholdRow hr;
    hr.household_id = cell("household_id");
    if (hr.household_id.empty()) {
      drop(row_no, "missing_household_id");
      continue;
    }

    bool bad = false;
    auto need_int = [&](const std::string& field, int* out) {
      if (bad) return;
      const std::string v = cell(field);
      if (v.empty()) {
        drop(row_no, "missing_" + field);
        bad = true;
      } else if (!parse_int(v, out)) {
        drop(row_no, "invalid_" + field);
        bad = true;
      }
    };
    auto need_double = [&](const std::string& field, double* out) {
      if (bad) return;
      const std::string v = cell(field);
      if (v.empty()) {
        drop(row_no, "missing_" + field);
        bad = true;
      } else if (!parse_double(v, out)) {
        drop(row_no, "invalid_" + field);
        bad = true;
      }
    };

    int sex_code = 0;
    need_int("head_age", &hr.head_age);
    need_int("head_sex", &sex_code);
    need_int("head_inactive", &hr.head_inactive);
    need_int("pami", &hr.pami);
    need_int("any_insurance", &hr.any_insurance);
    need_int("voluntary", &hr.voluntary);
    need_int("multiple", &hr.multiple);
    need_double("expansion_factor", &hr.expansion_factor);
    need_double("total_spend_pc", &hr.total_spend_pc);
    need_double("health_spend_pc", &hr.health_spend_pc);
    if (bad) continue;

    if (hr.head_age < 18 || hr.head_age > 110) {
      drop(row_no, "age_out_of_range");
      continue;
    }
    if (sex_code != 1 && sex_code != 2) {
      drop(row_no, "invalid_head_sex");
      continue;
    }
    hr.head_sex = sex_code == 1 ? Sex::Female : Sex::Male;

    const std::pair<const char*, int> binaries[] = {
        {"head_inactive", hr.head_inactive},
        {"pami", hr.pami},
        {"any_insurance", hr.any_insurance},
        {"voluntary", hr.voluntary},
        {"multiple", hr.multiple}};
    bool binary_ok = true;
    for (const auto& [field, value] : binaries) {
      if (value != 0 && value != 1) {
        drop(row_no, std::string("invalid_") + field);
        binary_ok = false;
        break;
      }
    }
    if (!binary_ok) continue;

    if (!(hr.expansion_factor > 0.0)) {
      drop(row_no, "nonpositive_expansion_factor");
      continue;
    }
    if (hr.total_spend_pc < 0.0 || hr.health_spend_pc < 0.0) {
      drop(row_no, "negative_spending");
      continue;
    }

    bool flag_ok = true;
    for (const std::string& field : kFlagFields) {
      const std::string v = cell(field);
      if (v.empty()) continue;
      int flag = 0;
      if (!parse_int(v, &flag) || (flag != 0 && flag != 1)) {
        drop(row_no, "invalid_" + field);
        flag_ok = false;
        break;
      }
      if (field == "pharma") hr.pharma = flag;
      else if (field == "medical_services") hr.medical_services = flag;
      else if (field == "dental") hr.dental = flag;
      else hr.equipment = flag;
    }
    if (!flag_ok) continue;

    ++frame.report.rows_kept;
    frame.rows.push_back(std::move(hr));
  }
  return frame;
}

const std::vector<std::string>& known_variables() {
  static const std::vector<std::string> names = {
      "pami",     "any_insurance", "voluntary", "multiple", "pharma",
      "medical_services", "dental", "equipment", "gbs_share", "cat10",
      "cat25",    "lgasto",        "lgsalud",   "sexo",     "inac",
      "edad"};
  return names;
}

std::optional<double> variable_value(const HouseholdRow& row,
                                     const DerivedIndicators& ind,
                                     const std::string& name) {
  auto opt_int = [](const std::optional<int>& v) -> std::optional<double> {
    if (!v) return std::nullopt;
    return static_cast<double>(*v);
  };
  if (name == "pami") return row.pami;
  if (name == "any_insurance") return row.any_insurance;
  if (name == "voluntary") return row.voluntary;
  if (name == "multiple") return row.multiple;
  if (name == "pharma") return opt_int(row.pharma);
  if (name == "medical_services") return opt_int(row.medical_services);
  if (name == "dental") return opt_int(row.dental);
  if (name == "equipment") return opt_int(row.equipment);
  if (name == "gbs_share") return ind.gbs_share;
  if (name == "cat10") return ind.cat10;
  if (name == "cat25") return ind.cat25;
  if (name == "lgasto") return ind.lgasto;
  if (name == "lgsalud") return ind.lgsalud;
  if (name == "sexo") return row.head_sex == Sex::Female ? 1.0 : 0.0;
  if (name == "inac") return row.head_inactive;
  if (name == "edad") return static_cast<double>(row.head_age);
  throw parameter_error("unknown survey variable: " + name);
}

Dataset dataset_from_rows(const std::vector<HouseholdRow>& rows,
                          const std::string& outcome, const std::string& treatment,
                          const std::vector<std::string>& covariates,
                          IngestReport* report) {
  Dataset data;
  data.cutoff = 0.0;
  data.outcome_name = outcome;
  data.treatment_name = treatment;
  data.covariate_names = covariates;
  std::size_t missing = 0;
  for (const HouseholdRow& row : rows) {
    const DerivedIndicators ind = derive_indicators(row);
    const std::optional<double> y = variable_value(row, ind, outcome);
    const std::optional<double> x = variable_value(row, ind, treatment);
    bool covs_ok = true;
    std::vector<double> cv;
    cv.reserve(covariates.size());
    for (const std::string& c : covariates) {
      const std::optional<double> v = variable_value(row, ind, c);
      if (!v) {
        covs_ok = false;
        break;
      }
      cv.push_back(*v);
    }
    if (!y || !x || !covs_ok) {
      ++missing;
      continue;
    }
    Observation obs;
    obs.z = running_variable(row.head_age, row.head_sex);
    obs.y = *y;
    obs.x = *x;
    obs.covariates = std::move(cv);
    obs.weight = row.expansion_factor;
    data.observations.push_back(std::move(obs));
  }
  if (report) {
    report->outcome = outcome;
    report->outcome_missing = missing;
  }
  return data;
}

std::pair<Dataset, IngestReport> load_survey(const std::string& path,
                                             const SurveySchema& schema,
                                             const std::string& outcome,
                                             const std::string& treatment,
                                             const std::vector<std::string>& covariates) {
  SurveyFrame frame = load_survey_rows(path, schema);
  IngestReport report = frame.report;
  Dataset data = dataset_from_rows(frame.rows, outcome, treatment, covariates, &report);
  return {std::move(data), std::move(report)};
}

std::vector<SummaryRow> descriptive_table(const Dataset& data) {
  if (data.observations.empty())
    throw parameter_error("descriptive_table: dataset is empty");
  std::vector<SummaryRow> table;
  auto add = [&](const std::string& name, auto&& get) {
    double wsum = 0.0, mean = 0.0;
    for (const Observation& obs : data.observations) {
      wsum += obs.weight;
      mean += obs.weight * get(obs);
    }
    mean /= wsum;
    double var = 0.0;
    for (const Observation& obs : data.observations) {
      const double d = get(obs) - mean;
      var += obs.weight * d * d;
    }
    var /= wsum;
    table.push_back({name, data.observations.size(), mean, std::sqrt(var)});
  };
  add("z", [](const Observation& o) { return o.z; });
  add(data.outcome_name, [](const Observation& o) { return o.y; });
  add(data.treatment_name, [](const Observation& o) { return o.x; });
  for (std::size_t c = 0; c < data.covariate_names.size(); ++c)
    add(data.covariate_names[c],
        [c](const Observation& o) { return o.covariates[c]; });
  return table;
}

}  // namespace rdlocal
