#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include "iapg/experiments.hpp"

namespace iapg {

namespace {

constexpr const char* kTraceHeader = "k,J_k,residual,eps_abs,eps_rel,F,alpha,B,L";

template <typename T>
T parse_field(const std::string& field, int line_no) {
  T out{};
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw std::runtime_error("trace csv line " + std::to_string(line_no) + ": bad field '" +
                             field + "'");
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf.data(), ptr);
}

std::vector<TraceRow> trace_rows(const OuterTrace<double>& trace) {
  std::vector<TraceRow> rows;
  rows.reserve(trace.size());
  for (const auto& rec : trace) {
    rows.push_back(TraceRow{rec.k, rec.J, rec.residual, rec.eps_abs, rec.eps_rel, rec.F, rec.alpha,
                            rec.B, rec.L});
  }
  return rows;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows,
                     const std::vector<std::string>& notes) {
  out << "# k: outer iteration; J_k: inner iterations in iteration k (incl. Armijo retries)\n"
         "# residual: ||x_k - y_k||; eps_abs: absolute inner tolerance; "
         "eps_rel: (rho_k/2)||x_k - y_k||^2\n"
         "# F: f(x_k) + omega(A x_k); alpha: momentum; B: Armijo constant; L: B + rho_k\n";
  for (const auto& note : notes) out << "# " << note << '\n';
  out << kTraceHeader << '\n';
  for (const auto& r : rows) {
    out << r.k << ',' << r.J << ',' << format_double(r.residual) << ','
        << format_double(r.eps_abs) << ',' << format_double(r.eps_rel) << ','
        << format_double(r.F) << ',' << format_double(r.alpha) << ',' << format_double(r.B)
        << ',' << format_double(r.L) << '\n';
  }
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::vector<TraceRow> rows;
  std::string line;
  int line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      if (line != kTraceHeader) {
        throw std::runtime_error("trace csv: unexpected header '" + line + "'");
      }
      seen_header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 9) {
      throw std::runtime_error("trace csv line " + std::to_string(line_no) +
                               ": expected 9 fields");
    }
    TraceRow r;
    r.k = parse_field<long>(fields[0], line_no);
    r.J = parse_field<long>(fields[1], line_no);
    r.residual = parse_field<double>(fields[2], line_no);
    r.eps_abs = parse_field<double>(fields[3], line_no);
    r.eps_rel = parse_field<double>(fields[4], line_no);
    r.F = parse_field<double>(fields[5], line_no);
    r.alpha = parse_field<double>(fields[6], line_no);
    r.B = parse_field<double>(fields[7], line_no);
    r.L = parse_field<double>(fields[8], line_no);
    rows.push_back(r);
  }
  if (!seen_header) throw std::runtime_error("trace csv: missing header");
  return rows;
}

void write_signals_csv(std::ostream& out, const Vector<double>& ground_truth,
                       const Vector<double>& observed, const Vector<double>& recovered) {
  if (ground_truth.size() != observed.size() || observed.size() != recovered.size()) {
    throw std::invalid_argument("write_signals_csv: length mismatch");
  }
  out << "index,ground_truth,observed,recovered\n";
  for (Index i = 0; i < recovered.size(); ++i) {
    out << i << ',' << format_double(ground_truth[i]) << ',' << format_double(observed[i]) << ','
        << format_double(recovered[i]) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const InnerBenchResult& result) {
  out << "# smallest inner iteration j with duality gap <= eps, over independent trials\n"
         "# censored_count: trials that hit the iteration limit first (recorded as max_iters)\n"
         "i,eps,min,q1,median,q3,max,censored_count\n";
  for (const auto& row : result.rows) {
    out << row.i << ',' << format_double(row.eps) << ',' << format_double(row.summary.min) << ','
        << format_double(row.summary.q1) << ',' << format_double(row.summary.median) << ','
        << format_double(row.summary.q3) << ',' << format_double(row.summary.max) << ','
        << row.censored << '\n';
  }
}

}  // namespace iapg
