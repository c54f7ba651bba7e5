#include "smmc/trace_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "smmc/error.hpp"

namespace smmc {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

void write_trace_csv(const SimTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoError, "cannot open " + path.string() + " for writing");

  const std::vector<std::string> names = trace.column_names();
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  out << '\n';

  char buf[32];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const std::vector<double> r = trace.row(i);
    for (std::size_t c = 0; c < r.size(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", r[c]);
      if (c) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::kIoError, "write failed for " + path.string());
}

SimTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::kIoError, "missing header in " + path.string());
  const std::vector<std::string> header = split(line);
  constexpr std::size_t kFixed = 14;
  if (header.size() < kFixed) throw Error(ErrorKind::kIoError, "header too short");

  SimTrace tr;
  tr.validities.resize(header.size() - kFixed);
  if (header != tr.column_names()) throw Error(ErrorKind::kIoError, "unexpected CSV header");

  std::vector<std::vector<double>*> cols{&tr.t,    &tr.phi_dr, &tr.phi_qr, &tr.i_ds, &tr.i_qs,
                                         &tr.omega, &tr.te,    &tr.te_ref, &tr.u_d,  &tr.u_q,
                                         &tr.s_d,  &tr.s_q,    &tr.s_fused, &tr.v_lyap};
  for (auto& v : tr.validities) cols.push_back(&v);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != cols.size()) {
      throw Error(ErrorKind::kIoError, "line " + std::to_string(line_no) + ": wrong column count");
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      const char* first = cells[c].data();
      const char* last = first + cells[c].size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last) {
        throw Error(ErrorKind::kIoError,
                    "line " + std::to_string(line_no) + ": bad number '" + cells[c] + "'");
      }
      cols[c]->push_back(v);
    }
  }
  return tr;
}

}  // namespace smmc
