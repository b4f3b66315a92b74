#include "dgm/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "dgm/errors.hpp"

namespace dgm {

std::string format_number(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string dataset_csv(const Dataset& dataset) {
  const std::size_t d = dataset.dim();
  std::string out;
  for (std::size_t j = 0; j < d; ++j) out += "x" + std::to_string(j) + ",";
  out += "region\n";
  const auto emit = [&](const PointSet& pts, const char* region) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (double v : pts[i]) out += format_number(v) + ",";
      out += region;
      out += '\n';
    }
  };
  emit(dataset.interior, "interior");
  emit(dataset.boundary, "boundary");
  return out;
}

std::string history_csv(const std::vector<HistoryRecord>& records) {
  std::string out = "iter,J,residual,divergence,boundary,errL1,errL2,lr,wall_ms\n";
  for (const HistoryRecord& r : records) {
    out += std::to_string(r.iteration);
    for (double v : {r.loss.total, r.loss.residual, r.loss.divergence, r.loss.boundary, r.err_l1, r.err_l2, r.lr,
                     r.wall_ms})
      out += "," + format_number(v);
    out += '\n';
  }
  return out;
}

namespace {

double parse_field(std::string_view s, std::size_t line) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw IoError("history table line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::vector<HistoryRecord> parse_history_csv(std::string_view text) {
  std::vector<HistoryRecord> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (line_no == 1) {
      if (line != "iter,J,residual,divergence,boundary,errL1,errL2,lr,wall_ms")
        throw IoError("history table has an unexpected header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        f.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (f.size() != 9)
      throw IoError("history table line " + std::to_string(line_no) + ": expected 9 fields, got " +
                    std::to_string(f.size()));
    HistoryRecord r;
    r.iteration = static_cast<std::int64_t>(parse_field(f[0], line_no));
    r.loss.total = parse_field(f[1], line_no);
    r.loss.residual = parse_field(f[2], line_no);
    r.loss.divergence = parse_field(f[3], line_no);
    r.loss.boundary = parse_field(f[4], line_no);
    r.err_l1 = parse_field(f[5], line_no);
    r.err_l2 = parse_field(f[6], line_no);
    r.lr = parse_field(f[7], line_no);
    r.wall_ms = parse_field(f[8], line_no);
    out.push_back(r);
  }
  if (line_no == 0) throw IoError("history table is empty");
  return out;
}

std::string eval_grid_csv(const EvalGrid& grid) {
  const std::size_t d = grid.points.dim();
  static const char* axes[] = {"x", "y", "z"};
  std::string out;
  for (std::size_t j = 0; j < d; ++j) out += std::string(j ? "," : "") + (j < 3 ? axes[j] : "x" + std::to_string(j));
  for (std::size_t k = 0; k < d; ++k) out += ",U" + std::to_string(k + 1);
  out += ",P";
  if (grid.exact) {
    for (std::size_t k = 0; k < d; ++k) out += ",u" + std::to_string(k + 1);
    out += ",p,errU,errP";
  }
  out += '\n';
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    const auto x = grid.points[i];
    for (std::size_t j = 0; j < d; ++j) out += (j ? "," : "") + format_number(x[j]);
    for (std::size_t k = 0; k < d; ++k) out += "," + format_number(grid.predicted.u[i * d + k]);
    out += "," + format_number(grid.predicted.p[i]);
    if (grid.exact) {
      for (std::size_t k = 0; k < d; ++k) out += "," + format_number(grid.exact->u[i * d + k]);
      out += "," + format_number(grid.exact->p[i]) + "," + format_number(grid.err_u[i]) + "," +
             format_number(grid.err_p[i]);
    }
    out += '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace dgm
