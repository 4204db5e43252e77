#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hsg/errors.hpp"
#include "hsg/format.hpp"
#include "hsg/linalg.hpp"
#include "hsg/scans.hpp"

namespace hsg {

namespace fs = std::filesystem;

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory '" + dir.string() + "'");
}

// ---------------------------------------------------------------------------
// CSV

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline bool looks_numeric(const std::string& s) {
  try {
    parse_double(s);
    return true;
  } catch (const IoError&) {
    return false;
  }
}

}  // namespace detail

inline std::string csv_string(const std::vector<std::string>& header, const double* data, Eigen::Index rows,
                              Eigen::Index cols, bool row_major) {
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) out += (j ? "," : "") + header[j];
  if (!header.empty()) out += "\n";
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (j) out += ',';
      out += format_double(row_major ? data[i * cols + j] : data[j * rows + i]);
    }
    out += '\n';
  }
  return out;
}

inline std::string csv_string(const std::vector<std::string>& header, const Matrix& m) {
  return csv_string(header, m.data(), m.rows(), m.cols(), false);
}

/// Numeric CSV with an optional header line (detected by a non-numeric first cell).
inline CsvTable parse_csv(const std::string& text, const std::string& origin = "csv") {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (rows.empty() && t.header.empty() && !detail::looks_numeric(cells.front())) {
      t.header = cells;
      continue;
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        row.push_back(parse_double(c));
      } catch (const IoError& e) {
        throw IoError(origin + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(origin + ":" + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(row));
  }
  const std::size_t cols = rows.empty() ? t.header.size() : rows.front().size();
  if (!t.header.empty() && t.header.size() != cols) throw IoError(origin + ": header width does not match rows");
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return t;
}

inline CsvTable read_csv(const fs::path& path) { return parse_csv(read_text(path), path.string()); }

inline Matrix read_matrix_csv(const fs::path& path) { return read_csv(path).values; }

inline Vector read_vector_csv(const fs::path& path) {
  Matrix m = read_matrix_csv(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw IoError("'" + path.string() + "' is not a single column or row");
}

inline std::vector<std::string> numbered_names(const std::string& stem, Eigen::Index n) {
  std::vector<std::string> out;
  for (Eigen::Index i = 1; i <= n; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

// ---------------------------------------------------------------------------
// Chains

inline nlohmann::json to_json(const StepCounters& c) {
  return {{"conditional_draws", c.conditional_draws},
          {"latent_updates", c.latent_updates},
          {"x_updates", c.x_updates},
          {"y_updates", c.y_updates},
          {"group_moves", c.group_moves},
          {"group_move_trials", c.group_move_trials},
          {"rejection_trials", c.rejection_trials},
          {"psi_clamps", c.psi_clamps}};
}

inline StepCounters counters_from_json(const nlohmann::json& j) {
  StepCounters c;
  c.conditional_draws = j.at("conditional_draws").get<std::uint64_t>();
  c.latent_updates = j.at("latent_updates").get<std::uint64_t>();
  c.x_updates = j.at("x_updates").get<std::uint64_t>();
  c.y_updates = j.at("y_updates").get<std::uint64_t>();
  c.group_moves = j.at("group_moves").get<std::uint64_t>();
  c.group_move_trials = j.at("group_move_trials").get<std::uint64_t>();
  c.rejection_trials = j.at("rejection_trials").get<std::uint64_t>();
  c.psi_clamps = j.at("psi_clamps").get<std::uint64_t>();
  return c;
}

inline nlohmann::json meta_to_json(const Chain& chain) {
  const ChainMeta& m = chain.meta;
  nlohmann::json j = {{"seed", m.seed},
                      {"chain_index", m.chain_index},
                      {"scan", m.scan},
                      {"scan_detail", m.scan_detail},
                      {"model", m.model},
                      {"updates_per_iteration", m.updates_per_iteration},
                      {"iterations", m.iterations},
                      {"burn_in", m.burn_in},
                      {"counters", to_json(m.counters)},
                      {"aborted", m.aborted},
                      {"wall_seconds", m.wall_seconds},
                      {"param_names", chain.param_names}};
  if (m.counters.group_move_trials > 0) j["group_move_acceptance"] = m.counters.group_move_acceptance();
  if (m.aborted) j["abort_reason"] = m.abort_reason;
  return j;
}

inline ChainMeta meta_from_json(const nlohmann::json& j) {
  try {
    ChainMeta m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.chain_index = j.at("chain_index").get<std::uint64_t>();
    m.scan = j.at("scan").get<std::string>();
    m.scan_detail = j.at("scan_detail").get<std::string>();
    m.model = j.at("model").get<std::string>();
    m.updates_per_iteration = j.at("updates_per_iteration").get<int>();
    m.iterations = j.at("iterations").get<std::size_t>();
    m.burn_in = j.at("burn_in").get<std::size_t>();
    m.counters = counters_from_json(j.at("counters"));
    m.aborted = j.at("aborted").get<bool>();
    m.abort_reason = j.value("abort_reason", std::string());
    m.wall_seconds = j.at("wall_seconds").get<double>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed chain metadata: ") + e.what());
  }
}

/// Writes <stem>.csv and <stem>-style meta JSON into `dir`.
inline void save_chain(const Chain& chain, const fs::path& dir, const std::string& csv_name = "chain.csv",
                       const std::string& meta_name = "meta.json") {
  ensure_directory(dir);
  write_text(dir / csv_name, csv_string(chain.param_names, chain.samples.data(), chain.samples.rows(),
                                        chain.samples.cols(), true));
  write_text(dir / meta_name, meta_to_json(chain).dump(2) + "\n");
}

inline Chain load_chain(const fs::path& dir, const std::string& csv_name = "chain.csv",
                        const std::string& meta_name = "meta.json") {
  Chain chain;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(dir / meta_name));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("cannot parse '" + (dir / meta_name).string() + "': " + e.what());
  }
  chain.meta = meta_from_json(j);
  CsvTable t = read_csv(dir / csv_name);
  chain.param_names = t.header;
  if (j.contains("param_names") && j["param_names"].get<std::vector<std::string>>() != t.header)
    throw IoError("chain.csv header does not match meta.json param_names");
  chain.samples = t.values;
  if (static_cast<std::size_t>(chain.samples.rows()) != chain.meta.iterations)
    throw IoError("chain.csv has " + std::to_string(chain.samples.rows()) + " rows but meta.json records " +
                  std::to_string(chain.meta.iterations) + " iterations");
  return chain;
}

}  // namespace hsg
