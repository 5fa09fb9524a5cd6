#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkrylov/experiment.hpp"

namespace qkrylov {

enum class OutputFormat { csv, json };

inline OutputFormat parse_output_format(std::string_view s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw InvalidInput("unknown output format '" + std::string(s) + "' (expected csv or json)");
}

inline constexpr const char* kRecordColumns =
    "system,variant,B,K,t,tau,reg_method,threshold,seed,kappa_pre,kappa_post,gs_energy,"
    "abs_error,deviation,eliminated,distinct_circuits";

/// 17 significant digits; non-finite values as inf, -inf, nan.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw InvalidInput("invalid number '" + s + "'");
  return v;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string opt_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

/// Splits one CSV line, honouring double-quoted fields.
inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

inline std::optional<double> opt_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

/// JSON has no inf/nan: they are stored as strings.
inline nlohmann::json json_number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

inline double json_to_double(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_double(j.get<std::string>());
  throw InvalidInput("expected a number, got " + j.dump());
}

inline nlohmann::json json_opt(const std::optional<double>& v) {
  return v ? json_number(*v) : nlohmann::json(nullptr);
}

inline std::optional<double> json_to_opt(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return json_to_double(j);
}

}  // namespace detail

inline void write_records_csv(std::ostream& out, std::span<const ExperimentRecord> records) {
  out << kRecordColumns << '\n';
  for (const auto& r : records) {
    out << detail::csv_field(r.system) << ',' << r.variant << ',' << r.B << ',' << r.K << ','
        << format_double(r.t) << ',' << format_double(r.tau) << ','
        << detail::csv_field(r.reg_method) << ',' << format_double(r.threshold) << ','
        << (r.seed ? std::to_string(*r.seed) : std::string("exact")) << ','
        << format_double(r.kappa_pre) << ',' << detail::opt_field(r.kappa_post) << ','
        << detail::opt_field(r.gs_energy) << ',' << detail::opt_field(r.abs_error) << ','
        << detail::opt_field(r.deviation) << ',' << (r.eliminated ? "true" : "false") << ','
        << r.distinct_circuits << '\n';
  }
}

inline std::vector<ExperimentRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kRecordColumns) {
    throw InvalidInput("record CSV header mismatch; expected: " + std::string(kRecordColumns));
  }
  std::vector<ExperimentRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 16) {
      throw InvalidInput("record CSV line " + std::to_string(line_no) + ": expected 16 fields, got " +
                         std::to_string(f.size()));
    }
    ExperimentRecord r;
    r.system = f[0];
    r.variant = f[1];
    r.B = std::stoull(f[2]);
    r.K = std::stoull(f[3]);
    r.t = parse_double(f[4]);
    r.tau = parse_double(f[5]);
    r.reg_method = f[6];
    r.threshold = parse_double(f[7]);
    if (f[8] != "exact") r.seed = std::stoull(f[8]);
    r.kappa_pre = parse_double(f[9]);
    r.kappa_post = detail::opt_double(f[10]);
    r.gs_energy = detail::opt_double(f[11]);
    r.abs_error = detail::opt_double(f[12]);
    r.deviation = detail::opt_double(f[13]);
    r.eliminated = f[14] == "true";
    r.distinct_circuits = std::stoull(f[15]);
    out.push_back(std::move(r));
  }
  return out;
}

inline nlohmann::json to_json(const ExperimentRecord& r) {
  return {
      {"system", r.system},
      {"variant", r.variant},
      {"B", r.B},
      {"K", r.K},
      {"t", detail::json_number(r.t)},
      {"tau", detail::json_number(r.tau)},
      {"reg_method", r.reg_method},
      {"threshold", detail::json_number(r.threshold)},
      {"seed", r.seed ? nlohmann::json(*r.seed) : nlohmann::json("exact")},
      {"kappa_pre", detail::json_number(r.kappa_pre)},
      {"kappa_post", detail::json_opt(r.kappa_post)},
      {"gs_energy", detail::json_opt(r.gs_energy)},
      {"abs_error", detail::json_opt(r.abs_error)},
      {"deviation", detail::json_opt(r.deviation)},
      {"eliminated", r.eliminated},
      {"distinct_circuits", r.distinct_circuits},
  };
}

inline ExperimentRecord record_from_json(const nlohmann::json& j) {
  ExperimentRecord r;
  r.system = j.at("system").get<std::string>();
  r.variant = j.at("variant").get<std::string>();
  r.B = j.at("B").get<std::size_t>();
  r.K = j.at("K").get<std::size_t>();
  r.t = detail::json_to_double(j.at("t"));
  r.tau = detail::json_to_double(j.at("tau"));
  r.reg_method = j.at("reg_method").get<std::string>();
  r.threshold = detail::json_to_double(j.at("threshold"));
  if (const auto& s = j.at("seed"); s.is_number_unsigned()) r.seed = s.get<std::uint64_t>();
  r.kappa_pre = detail::json_to_double(j.at("kappa_pre"));
  r.kappa_post = detail::json_to_opt(j.at("kappa_post"));
  r.gs_energy = detail::json_to_opt(j.at("gs_energy"));
  r.abs_error = detail::json_to_opt(j.at("abs_error"));
  r.deviation = detail::json_to_opt(j.at("deviation"));
  r.eliminated = j.at("eliminated").get<bool>();
  r.distinct_circuits = j.at("distinct_circuits").get<std::size_t>();
  return r;
}

inline void write_records_json(std::ostream& out, std::span<const ExperimentRecord> records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) arr.push_back(to_json(r));
  out << arr.dump(2) << '\n';
}

inline std::vector<ExperimentRecord> read_records_json(std::istream& in) {
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("malformed record JSON: ") + e.what());
  }
  if (!arr.is_array()) throw InvalidInput("record JSON must be an array");
  std::vector<ExperimentRecord> out;
  for (const auto& j : arr) out.push_back(record_from_json(j));
  return out;
}

inline void write_records(std::ostream& out, std::span<const ExperimentRecord> records,
                          OutputFormat format) {
  if (format == OutputFormat::csv) {
    write_records_csv(out, records);
  } else {
    write_records_json(out, records);
  }
}

namespace detail {

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

inline void finish_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace detail

inline void write_records(std::span<const ExperimentRecord> records, OutputFormat format,
                          const std::string& path) {
  auto out = detail::open_output(path);
  write_records(out, records, format);
  detail::finish_output(out, path);
}

// ---------------------------------------------------------------------------

inline constexpr const char* kStatsColumns =
    "system,variant,reg_method,K,quantity,n_runs,geo_mean,geo_std";

inline void write_stats_csv(std::ostream& out, const std::string& system, Variant variant,
                            std::span<const EnsembleRow> rows) {
  out << kStatsColumns << '\n';
  for (const auto& row : rows) {
    out << detail::csv_field(system) << ',' << to_string(variant) << ','
        << detail::csv_field(row.strategy) << ',' << row.K << ',' << row.quantity << ','
        << row.stats.n_runs << ',';
    if (row.stats.n_runs > 0) {
      out << format_double(row.stats.geo_mean) << ',' << format_double(row.stats.geo_std);
    } else {
      out << ',';
    }
    out << '\n';
  }
}

inline constexpr const char* kSingularColumns = "system,variant,K,seed,index,log10_sigma,is_elbow";

inline void write_singular_values_csv(std::ostream& out, const std::string& system,
                                      Variant variant, std::size_t K,
                                      std::span<const SingularValueRun> runs) {
  out << kSingularColumns << '\n';
  for (const auto& run : runs) {
    for (std::size_t i = 0; i < run.log10_values.size(); ++i) {
      out << detail::csv_field(system) << ',' << to_string(variant) << ',' << K << ','
          << (run.seed ? std::to_string(*run.seed) : std::string("exact")) << ',' << i << ','
          << format_double(run.log10_values[i]) << ','
          << (run.elbow && *run.elbow == i ? "true" : "false") << '\n';
    }
  }
}

}  // namespace qkrylov
