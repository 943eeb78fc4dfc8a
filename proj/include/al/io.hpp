#pragma once

// Plain-table serialization. Tables carry doubles only (complex data enters
// as re/im column pairs); formatting is %.17g throughout, so identical tables
// serialize to identical bytes.

#include <fstream>
#include <string>
#include <vector>

#include "al/integrator.hpp"

namespace al {

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline void write_csv(const std::string& path, const CsvTable& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot open for writing: " + path);
  for (size_t c = 0; c < t.columns.size(); ++c) {
    if (c) out << ',';
    out << t.columns[c];
  }
  out << '\n';
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size())
      throw validation_error("table row width mismatch in " + path);
    for (size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << fmt_g17(row[c]);
    }
    out << '\n';
  }
  if (!out) throw validation_error("write failed: " + path);
}

// Site-indexed dump of a state: n, alpha_re, alpha_im, beta_re, beta_im.
inline CsvTable state_table(const SequencePair& x) {
  CsvTable t;
  t.columns = {"n", "alpha_re", "alpha_im", "beta_re", "beta_im"};
  for (int n = x.n_min(); n <= x.n_max(); ++n)
    t.rows.push_back({static_cast<double>(n), x.alpha(n).real(),
                      x.alpha(n).imag(), x.beta(n).real(), x.beta(n).imag()});
  return t;
}

// Time series of the trajectory's observables: time, then one column each.
inline CsvTable series_table(const Trajectory& tr) {
  CsvTable t;
  t.columns.push_back("time");
  for (const auto& name : tr.observable_names) t.columns.push_back(name);
  for (size_t k = 0; k < tr.times.size(); ++k) {
    std::vector<double> row{tr.times[k]};
    for (const auto& obs : tr.observables) row.push_back(obs[k]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline CsvTable norm_series_table(const std::vector<double>& times,
                                  const std::vector<double>& values,
                                  const std::string& name) {
  if (times.size() != values.size())
    throw validation_error("norm_series_table: size mismatch");
  CsvTable t;
  t.columns = {"time", name};
  for (size_t k = 0; k < times.size(); ++k)
    t.rows.push_back({times[k], values[k]});
  return t;
}

}  // namespace al
