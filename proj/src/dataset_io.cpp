#include "rdlocal/dataset_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rdlocal {

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double to_double(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw io_error("read_dataset: bad number '" + s + "' in " + where);
  return v;
}

}  // namespace

void write_dataset(const Dataset& data, const std::string& stem,
                   const std::string& source_hash) {
  std::ostringstream csv;
  csv << "id,z,y,x";
  for (const std::string& name : data.covariate_names) csv << ',' << name;
  csv << ",weight\n";
  for (std::size_t i = 0; i < data.observations.size(); ++i) {
    const Observation& obs = data.observations[i];
    csv << i << ',' << fmt(obs.z) << ',' << fmt(obs.y) << ',' << fmt(obs.x);
    for (double c : obs.covariates) csv << ',' << fmt(c);
    csv << ',' << fmt(obs.weight) << '\n';
  }
  const std::string body = csv.str();

  std::ofstream out(stem + ".csv", std::ios::binary);
  if (!out) throw io_error("write_dataset: cannot write " + stem + ".csv");
  out << body;
  out.close();
  if (!out) throw io_error("write_dataset: failed writing " + stem + ".csv");

  nlohmann::json meta;
  meta["outcome"] = data.outcome_name;
  meta["treatment"] = data.treatment_name;
  meta["covariates"] = data.covariate_names;
  meta["cutoff"] = data.cutoff;
  meta["n"] = data.observations.size();
  meta["source_hash"] = source_hash.empty() ? fnv1a64_hex(body) : source_hash;

  std::ofstream mout(stem + ".meta.json", std::ios::binary);
  if (!mout) throw io_error("write_dataset: cannot write " + stem + ".meta.json");
  mout << meta.dump(2) << '\n';
  mout.close();
  if (!mout) throw io_error("write_dataset: failed writing " + stem + ".meta.json");
}

Dataset read_dataset(const std::string& stem) {
  std::ifstream min(stem + ".meta.json", std::ios::binary);
  if (!min) throw io_error("read_dataset: cannot open " + stem + ".meta.json");
  nlohmann::json meta;
  try {
    min >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw io_error("read_dataset: bad sidecar " + stem + ".meta.json: " + e.what());
  }

  Dataset data;
  try {
    data.outcome_name = meta.at("outcome").get<std::string>();
    data.treatment_name = meta.at("treatment").get<std::string>();
    data.covariate_names = meta.at("covariates").get<std::vector<std::string>>();
    data.cutoff = meta.at("cutoff").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw io_error("read_dataset: sidecar " + stem + ".meta.json missing fields: " +
                   e.what());
  }

  std::ifstream in(stem + ".csv", std::ios::binary);
  if (!in) throw io_error("read_dataset: cannot open " + stem + ".csv");
  std::string line;
  if (!std::getline(in, line)) throw io_error("read_dataset: " + stem + ".csv is empty");
  const std::vector<std::string> header = split(line, ',');
  const std::size_t k = data.covariate_names.size();
  if (header.size() != 5 + k)
    throw io_error("read_dataset: header of " + stem + ".csv has " +
                   std::to_string(header.size()) + " columns, sidecar implies " +
                   std::to_string(5 + k));
  for (std::size_t c = 0; c < k; ++c)
    if (header[4 + c] != data.covariate_names[c])
      throw io_error("read_dataset: covariate column '" + header[4 + c] +
                     "' does not match sidecar name '" + data.covariate_names[c] + "'");

  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row_no;
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != 5 + k)
      throw io_error("read_dataset: row " + std::to_string(row_no) + " of " + stem +
                     ".csv has " + std::to_string(cells.size()) + " columns");
    const std::string where = "row " + std::to_string(row_no);
    Observation obs;
    obs.z = to_double(cells[1], where);
    obs.y = to_double(cells[2], where);
    obs.x = to_double(cells[3], where);
    obs.covariates.reserve(k);
    for (std::size_t c = 0; c < k; ++c)
      obs.covariates.push_back(to_double(cells[4 + c], where));
    obs.weight = to_double(cells[4 + k], where);
    data.observations.push_back(std::move(obs));
  }

  const std::size_t expected = meta.value("n", data.observations.size());
  if (expected != data.observations.size())
    throw io_error("read_dataset: sidecar says n=" + std::to_string(expected) +
                   " but " + stem + ".csv has " +
                   std::to_string(data.observations.size()) + " rows");
  return data;
}

}  // namespace rdlocal
