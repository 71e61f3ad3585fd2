#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rdlocal/types.hpp"

namespace rdlocal {

enum class Sex { Female, Male };

// One household, head-of-household fields already typed. The four consumption
// flags are optional: surveys may omit the column or leave cells empty.
struct HouseholdRow {
  std::string household_id;
  int head_age = 0;
  Sex head_sex = Sex::Female;
  int head_inactive = 0;
  int pami = 0;
  int any_insurance = 0;
  int voluntary = 0;
  int multiple = 0;
  double expansion_factor = 1.0;
  double total_spend_pc = 0.0;
  double health_spend_pc = 0.0;
  std::optional<int> pharma;
  std::optional<int> medical_services;
  std::optional<int> dental;
  std::optional<int> equipment;
};

// Age centered on the sex-specific retirement eligibility age:
// 61 for women, 66 for men. Ages outside [18, 110] are implausible.
double running_variable(int age, Sex sex);

struct DerivedIndicators {
  double gbs_share = 0.0;  // health / total spending, 0 when total is 0
  int cat10 = 0;           // share strictly above 10%
  int cat25 = 0;           // share strictly above 25%
  std::optional<double> lgasto;   // log total spending, needs total > 0
  std::optional<double> lgsalud;  // log health spending, needs health > 0
};

DerivedIndicators derive_indicators(const HouseholdRow& row);

// canonical field name -> column name in the file. Missing optional columns
// (the consumption flags) are tolerated; missing required ones are a
// schema_error naming the column.
struct SurveySchema {
  std::map<std::string, std::string> columns;
  char delimiter = ',';
};

// Identity mapping for every canonical field.
SurveySchema default_schema();

struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t rows_kept = 0;
  std::size_t rows_dropped = 0;
  std::map<std::string, std::size_t> drop_reasons;
  // (1-based data row number, reason) for every dropped row.
  std::vector<std::pair<std::size_t, std::string>> dropped_rows;
  // Kept rows excluded from one outcome's dataset because the outcome value
  // is missing there (e.g. log of zero spending).
  std::size_t outcome_missing = 0;
  std::string outcome;

  bool reconciles() const { return rows_read == rows_kept + rows_dropped; }
};

struct SurveyFrame {
  std::vector<HouseholdRow> rows;
  IngestReport report;
  std::string source_hash;  // FNV-1a 64 of the raw file bytes, hex
};

SurveyFrame load_survey_rows(const std::string& path, const SurveySchema& schema);

// Names usable as outcome / treatment / covariates when building datasets.
const std::vector<std::string>& known_variables();

// Value of a named variable for one row; nullopt when undefined there.
std::optional<double> variable_value(const HouseholdRow& row,
                                     const DerivedIndicators& ind,
                                     const std::string& name);

// Rows with a defined outcome become observations: z from age and sex, weight
// from the expansion factor. report (optional) receives the outcome-missing
// count.
Dataset dataset_from_rows(const std::vector<HouseholdRow>& rows,
                          const std::string& outcome, const std::string& treatment,
                          const std::vector<std::string>& covariates,
                          IngestReport* report = nullptr);

// load_survey_rows + dataset_from_rows in one call.
std::pair<Dataset, IngestReport> load_survey(
    const std::string& path, const SurveySchema& schema, const std::string& outcome,
    const std::string& treatment = "pami",
    const std::vector<std::string>& covariates = {"sexo", "inac"});

struct SummaryRow {
  std::string name;
  std::size_t n = 0;
  double mean = 0.0;  // expansion-weighted
  double sd = 0.0;    // expansion-weighted, population form
};

// Running variable, outcome, treatment, then covariates.
std::vector<SummaryRow> descriptive_table(const Dataset& data);

}  // namespace rdlocal
