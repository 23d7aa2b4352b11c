#include "psindy/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "psindy/errors.hpp"

namespace psindy {

namespace {

void append_real(std::string& out, double v) { fmt::format_to(std::back_inserter(out), "{:.17g}", v); }

std::string numbered_header(const char* prefix, std::size_t d) {
  std::string h;
  for (std::size_t k = 1; k <= d; ++k) h += fmt::format("{}x{}", prefix, k);
  return h;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_real(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(fmt::format("{}:{}: '{}' is not a number", path.string(), line, s));
  }
  return v;
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (t.header.empty()) {
      t.header = split(line);
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw ParseError(fmt::format("{}:{}: expected {} columns, found {}", path.string(), lineno,
                                   t.header.size(), cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_real(c, path, lineno));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw ParseError(fmt::format("{}: missing header row", path.string()));
  return t;
}

}  // namespace

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t" + numbered_header(",", traj.dimension()) + "\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    append_real(out, traj.times[k]);
    for (Eigen::Index j = 0; j < traj.states.cols(); ++j) {
      out += ',';
      append_real(out, traj.states(static_cast<Eigen::Index>(k), j));
    }
    out += '\n';
  }
  return out;
}

std::string samples_csv(const SampleSequence& seq) {
  std::string out = "n,t" + numbered_header(",", seq.dimension()) + "\n";
  for (std::size_t n = 0; n < seq.size(); ++n) {
    out += std::to_string(n);
    out += ',';
    append_real(out, seq.times[n]);
    for (Eigen::Index j = 0; j < seq.samples.cols(); ++j) {
      out += ',';
      append_real(out, seq.samples(static_cast<Eigen::Index>(n), j));
    }
    out += '\n';
  }
  return out;
}

std::string matrix_csv(const Matrix& m, const std::vector<std::string>& header) {
  std::string out;
  if (header.empty()) {
    out = numbered_header(",", static_cast<std::size_t>(m.cols())).substr(m.cols() > 0 ? 1 : 0);
  } else {
    for (std::size_t k = 0; k < header.size(); ++k) out += (k ? "," : "") + header[k];
  }
  out += '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      append_real(out, m(i, j));
    }
    out += '\n';
  }
  return out;
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  const Table t = read_table(path);
  if (t.header.size() < 2 || t.header[0] != "t") {
    throw ParseError(fmt::format("{}: trajectory header must be t,x1,...", path.string()));
  }
  if (t.rows.size() < 2) throw ParseError(fmt::format("{}: trajectory needs two rows", path.string()));
  Trajectory traj;
  const auto d = static_cast<Eigen::Index>(t.header.size() - 1);
  traj.states.resize(static_cast<Eigen::Index>(t.rows.size()), d);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    traj.times.push_back(t.rows[i][0]);
    for (Eigen::Index j = 0; j < d; ++j) {
      traj.states(static_cast<Eigen::Index>(i), j) = t.rows[i][static_cast<std::size_t>(j) + 1];
    }
    if (i > 0 && !(traj.times[i] > traj.times[i - 1])) {
      throw ParseError(fmt::format("{}: times are not strictly increasing", path.string()));
    }
  }
  traj.step = traj.times[1] - traj.times[0];
  return traj;
}

SampleSequence read_samples_csv(const std::filesystem::path& path) {
  const Table t = read_table(path);
  if (t.header.size() < 3 || t.header[0] != "n" || t.header[1] != "t") {
    throw ParseError(fmt::format("{}: sample header must be n,t,x1,...", path.string()));
  }
  SampleSequence seq;
  const auto d = static_cast<Eigen::Index>(t.header.size() - 2);
  seq.samples.resize(static_cast<Eigen::Index>(t.rows.size()), d);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    seq.times.push_back(t.rows[i][1]);
    for (Eigen::Index j = 0; j < d; ++j) {
      seq.samples(static_cast<Eigen::Index>(i), j) = t.rows[i][static_cast<std::size_t>(j) + 2];
    }
  }
  seq.source_id = path.stem().string();
  return seq;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  const Table t = read_table(path);
  Matrix m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t j = 0; j < t.header.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t.rows[i][j];
    }
  }
  return m;
}

std::vector<std::string> read_csv_header(const std::filesystem::path& path) {
  return read_table(path).header;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << content;
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace psindy
