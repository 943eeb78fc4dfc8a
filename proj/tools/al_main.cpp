// Command-line laboratory driver. One command per process:
//
//   al <command> [--config FILE] [--flow PRESET | --r R- R+ --c-plus ...
//      --c-minus ...] [--window NMIN NMAX] [--boundary MODE] [--h H] [--t1 T]
//      [--out DIR] [--format csv|json] [--seed N]
//
// Commands: evolve, hierarchy, check, closeness, asymptotics, spectrum,
// support. Settings resolve as flags > AL_OUT_DIR (output directory only)
// > config file > per-command defaults; the manifest records every resolved
// value. Exit codes: 0 success, 1 validation error, 2 numerical abort,
// 3 invariant-suite failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "al/checks.hpp"
#include "al/experiments.hpp"
#include "al/io.hpp"
#include "al/lax_zc.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------- config ---

struct FlowConfig {
  std::string preset = "al";  // al | schur | phase | custom
  int r_minus = 1, r_plus = 1;
  std::vector<al::cplx> c_minus, c_plus;  // custom preset only
  al::cplx phase_c{1, 0};
};

struct WindowConfig {
  int n_min = -100, n_max = 100;
  std::string boundary = "pad_zero";
  int frozen_band = 0;
};

struct NumericsConfig {
  double h = 1e-3, t1 = 1.0;
  int stride = 10;
};

struct OutputConfig {
  std::string dir = "out";
  std::string format = "csv";
};

struct ClosenessConfig {
  int perturb_site = 0;
  al::cplx perturb_amp{1e-3, 0};
  std::string weight = "one_plus_abs";  // unit | one_plus_abs | power_plus
  double weight_exponent = 1.0;
  double p = al::p_inf;
  double slack = 1.1;
};

struct AsymptoticsConfig {
  al::cplx a{0.3, 0}, b{0.3, 0};
  double delta = 1.0;
  std::vector<int> windows{201, 401};
  int margin = 16;
  double p = al::p_inf;
};

struct RunConfig {
  std::string command;
  FlowConfig flow;
  WindowConfig window;
  al::ProfileParams profile;
  NumericsConfig numerics;
  OutputConfig output;
  std::uint64_t seed = al::default_check_seed;
  ClosenessConfig closeness;
  AsymptoticsConfig asym;
};

// ------------------------------------------------------------ json access ---

[[noreturn]] void bad_field(const std::string& path, const std::string& want) {
  throw al::validation_error("config: field '" + path + "' must be " + want);
}

void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw al::validation_error("config: unknown field '" + it.key() +
                                 "' in " + where);
  }
}

double get_num(const json& j, const std::string& path) {
  if (!j.is_number()) bad_field(path, "a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) bad_field(path, "an integer");
  return j.get<int>();
}

std::string get_str(const json& j, const std::string& path) {
  if (!j.is_string()) bad_field(path, "a string");
  return j.get<std::string>();
}

al::cplx get_cplx(const json& j, const std::string& path) {
  if (j.is_number()) return al::cplx(j.get<double>(), 0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return al::cplx(j[0].get<double>(), j[1].get<double>());
  bad_field(path, "a number or [re, im]");
}

double get_p(const json& j, const std::string& path) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return al::p_inf;
    bad_field(path, "a number >= 1 or \"inf\"");
  }
  return get_num(j, path);
}

std::vector<al::cplx> get_cplx_list(const json& j, const std::string& path) {
  if (!j.is_array()) bad_field(path, "an array");
  std::vector<al::cplx> out;
  for (size_t i = 0; i < j.size(); ++i)
    out.push_back(get_cplx(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// --------------------------------------------------------- config loading ---

void apply_file(RunConfig& c, const json& j) {
  check_keys(j,
             {"command", "flow", "window", "profile", "numerics", "output",
              "seed", "closeness", "asymptotics"},
             "top level");
  if (j.contains("command")) c.command = get_str(j["command"], "command");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) bad_field("seed", "a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("flow")) {
    const json& f = j["flow"];
    check_keys(f, {"preset", "r", "c_minus", "c_plus", "c"}, "flow");
    if (f.contains("preset")) c.flow.preset = get_str(f["preset"], "flow.preset");
    if (f.contains("r")) {
      if (!f["r"].is_array() || f["r"].size() != 2)
        bad_field("flow.r", "[r_minus, r_plus]");
      c.flow.r_minus = get_int(f["r"][0], "flow.r[0]");
      c.flow.r_plus = get_int(f["r"][1], "flow.r[1]");
      c.flow.preset = "custom";
    }
    if (f.contains("c_minus")) {
      c.flow.c_minus = get_cplx_list(f["c_minus"], "flow.c_minus");
      c.flow.preset = "custom";
    }
    if (f.contains("c_plus")) {
      c.flow.c_plus = get_cplx_list(f["c_plus"], "flow.c_plus");
      c.flow.preset = "custom";
    }
    if (f.contains("c")) c.flow.phase_c = get_cplx(f["c"], "flow.c");
  }
  if (j.contains("window")) {
    const json& w = j["window"];
    check_keys(w, {"n_min", "n_max", "boundary", "frozen_band"}, "window");
    if (w.contains("n_min")) c.window.n_min = get_int(w["n_min"], "window.n_min");
    if (w.contains("n_max")) c.window.n_max = get_int(w["n_max"], "window.n_max");
    if (w.contains("boundary"))
      c.window.boundary = get_str(w["boundary"], "window.boundary");
    if (w.contains("frozen_band"))
      c.window.frozen_band = get_int(w["frozen_band"], "window.frozen_band");
  }
  if (j.contains("profile")) {
    const json& p = j["profile"];
    check_keys(p,
               {"kind", "a", "b", "a_left", "b_left", "delta", "n0", "n1",
                "width", "center"},
               "profile");
    if (p.contains("kind")) {
      std::string k = get_str(p["kind"], "profile.kind");
      using K = al::ProfileParams::Kind;
      if (k == "power_tail") c.profile.kind = K::power_tail;
      else if (k == "steplike") c.profile.kind = K::steplike;
      else if (k == "compact") c.profile.kind = K::compact;
      else if (k == "gaussian") c.profile.kind = K::gaussian;
      else bad_field("profile.kind",
                     "one of power_tail, steplike, compact, gaussian");
    }
    if (p.contains("a")) c.profile.a = get_cplx(p["a"], "profile.a");
    if (p.contains("b")) c.profile.b = get_cplx(p["b"], "profile.b");
    if (p.contains("a_left")) c.profile.a_left = get_cplx(p["a_left"], "profile.a_left");
    if (p.contains("b_left")) c.profile.b_left = get_cplx(p["b_left"], "profile.b_left");
    if (p.contains("delta")) c.profile.delta = get_num(p["delta"], "profile.delta");
    if (p.contains("n0")) c.profile.n0 = get_int(p["n0"], "profile.n0");
    if (p.contains("n1")) c.profile.n1 = get_int(p["n1"], "profile.n1");
    if (p.contains("width")) c.profile.width = get_num(p["width"], "profile.width");
    if (p.contains("center")) c.profile.center = get_num(p["center"], "profile.center");
  }
  if (j.contains("numerics")) {
    const json& n = j["numerics"];
    check_keys(n, {"h", "t1", "stride"}, "numerics");
    if (n.contains("h")) c.numerics.h = get_num(n["h"], "numerics.h");
    if (n.contains("t1")) c.numerics.t1 = get_num(n["t1"], "numerics.t1");
    if (n.contains("stride")) c.numerics.stride = get_int(n["stride"], "numerics.stride");
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    check_keys(o, {"dir", "format"}, "output");
    if (o.contains("dir")) c.output.dir = get_str(o["dir"], "output.dir");
    if (o.contains("format")) {
      c.output.format = get_str(o["format"], "output.format");
      if (c.output.format != "csv" && c.output.format != "json")
        bad_field("output.format", "\"csv\" or \"json\"");
    }
  }
  if (j.contains("closeness")) {
    const json& cl = j["closeness"];
    check_keys(cl,
               {"perturb_site", "perturb_amp", "weight", "weight_exponent",
                "p", "slack"},
               "closeness");
    if (cl.contains("perturb_site"))
      c.closeness.perturb_site = get_int(cl["perturb_site"], "closeness.perturb_site");
    if (cl.contains("perturb_amp"))
      c.closeness.perturb_amp = get_cplx(cl["perturb_amp"], "closeness.perturb_amp");
    if (cl.contains("weight"))
      c.closeness.weight = get_str(cl["weight"], "closeness.weight");
    if (cl.contains("weight_exponent"))
      c.closeness.weight_exponent =
          get_num(cl["weight_exponent"], "closeness.weight_exponent");
    if (cl.contains("p")) c.closeness.p = get_p(cl["p"], "closeness.p");
    if (cl.contains("slack")) c.closeness.slack = get_num(cl["slack"], "closeness.slack");
  }
  if (j.contains("asymptotics")) {
    const json& as = j["asymptotics"];
    check_keys(as, {"a", "b", "delta", "windows", "margin", "p"}, "asymptotics");
    if (as.contains("a")) c.asym.a = get_cplx(as["a"], "asymptotics.a");
    if (as.contains("b")) c.asym.b = get_cplx(as["b"], "asymptotics.b");
    if (as.contains("delta")) c.asym.delta = get_num(as["delta"], "asymptotics.delta");
    if (as.contains("windows")) {
      if (!as["windows"].is_array() || as["windows"].empty())
        bad_field("asymptotics.windows", "a nonempty array of sizes");
      c.asym.windows.clear();
      for (size_t i = 0; i < as["windows"].size(); ++i)
        c.asym.windows.push_back(get_int(
            as["windows"][i], "asymptotics.windows[" + std::to_string(i) + "]"));
    }
    if (as.contains("margin")) c.asym.margin = get_int(as["margin"], "asymptotics.margin");
    if (as.contains("p")) c.asym.p = get_p(as["p"], "asymptotics.p");
  }
}

// ----------------------------------------------------------- construction ---

al::Boundary parse_boundary(const std::string& s) {
  if (s == "pad_zero") return al::Boundary::pad_zero;
  if (s == "periodic") return al::Boundary::periodic;
  if (s == "frozen_edges") return al::Boundary::frozen_edges;
  throw al::validation_error(
      "config: boundary must be pad_zero, periodic, or frozen_edges (got '" +
      s + "')");
}

al::FlowSpec build_flow(const FlowConfig& f) {
  al::FlowSpec s;
  if (f.preset == "al") {
    s = al::FlowSpec::al_system();
  } else if (f.preset == "schur") {
    s = al::FlowSpec::schur();
  } else if (f.preset == "phase") {
    s = al::FlowSpec::phase(f.phase_c);
  } else if (f.preset == "custom") {
    s.r_minus = f.r_minus;
    s.r_plus = f.r_plus;
    if (!f.c_minus.empty()) s.c_minus = f.c_minus;
    if (!f.c_plus.empty()) s.c_plus = f.c_plus;
  } else {
    throw al::validation_error("config: unknown flow preset '" + f.preset +
                               "' (al, schur, phase, or custom)");
  }
  s.validate();
  return s;
}

al::Weight build_weight(const ClosenessConfig& c, const al::Window& w) {
  if (c.weight == "unit") return al::Weight::unit(w);
  if (c.weight == "one_plus_abs") return al::Weight::one_plus_abs(w);
  if (c.weight == "power_plus")
    return al::Weight::power_plus(w, c.weight_exponent);
  throw al::validation_error(
      "config: closeness.weight must be unit, one_plus_abs, or power_plus");
}

// ------------------------------------------------------------- manifests ---

json cplx_json(al::cplx v) { return json::array({v.real(), v.imag()}); }

json cplx_list_json(const std::vector<al::cplx>& v) {
  json a = json::array();
  for (auto c : v) a.push_back(cplx_json(c));
  return a;
}

std::string profile_kind_name(al::ProfileParams::Kind k) {
  using K = al::ProfileParams::Kind;
  switch (k) {
    case K::power_tail: return "power_tail";
    case K::steplike: return "steplike";
    case K::compact: return "compact";
    case K::gaussian: return "gaussian";
  }
  return "?";
}

std::string p_name(double p) {
  return p == al::p_inf ? std::string("inf") : al::fmt_g17(p);
}

json config_json(const RunConfig& c, const al::FlowSpec& spec) {
  json flow = {{"preset", c.flow.preset},
               {"r", {spec.r_minus, spec.r_plus}},
               {"c_minus", cplx_list_json(spec.c_minus)},
               {"c_plus", cplx_list_json(spec.c_plus)}};
  if (c.flow.preset == "phase") flow["c"] = cplx_json(c.flow.phase_c);
  return json{
      {"command", c.command},
      {"flow", flow},
      {"window",
       {{"n_min", c.window.n_min},
        {"n_max", c.window.n_max},
        {"boundary", c.window.boundary},
        {"frozen_band", c.window.frozen_band}}},
      {"profile",
       {{"kind", profile_kind_name(c.profile.kind)},
        {"a", cplx_json(c.profile.a)},
        {"b", cplx_json(c.profile.b)},
        {"a_left", cplx_json(c.profile.a_left)},
        {"b_left", cplx_json(c.profile.b_left)},
        {"delta", c.profile.delta},
        {"n0", c.profile.n0},
        {"n1", c.profile.n1},
        {"width", c.profile.width},
        {"center", c.profile.center}}},
      {"numerics",
       {{"h", c.numerics.h}, {"t1", c.numerics.t1}, {"stride", c.numerics.stride}}},
      {"output", {{"dir", c.output.dir}, {"format", c.output.format}}},
      {"seed", c.seed},
      {"closeness",
       {{"perturb_site", c.closeness.perturb_site},
        {"perturb_amp", cplx_json(c.closeness.perturb_amp)},
        {"weight", c.closeness.weight},
        {"weight_exponent", c.closeness.weight_exponent},
        {"p", p_name(c.closeness.p)},
        {"slack", c.closeness.slack}}},
      {"asymptotics",
       {{"a", cplx_json(c.asym.a)},
        {"b", cplx_json(c.asym.b)},
        {"delta", c.asym.delta},
        {"windows", c.asym.windows},
        {"margin", c.asym.margin},
        {"p", p_name(c.asym.p)}}}};
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw al::validation_error("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw al::validation_error("write failed: " + path.string());
}

// Writes a table as CSV or as a {columns, rows} JSON document.
void write_table(const RunConfig& c, const std::string& name,
                 const al::CsvTable& t) {
  fs::path dir(c.output.dir);
  if (c.output.format == "csv") {
    al::write_csv((dir / (name + ".csv")).string(), t);
  } else {
    json rows = json::array();
    for (const auto& r : t.rows) rows.push_back(r);
    write_json_file(dir / (name + ".json"),
                    json{{"columns", t.columns}, {"rows", rows}});
  }
}

// ---------------------------------------------------------------- runners ---

struct Resolved {
  al::FlowSpec spec;
  al::Window win;
};

json run_evolve(const RunConfig& c, const Resolved& R) {
  al::SequencePair x0 = al::make_profile(R.win, c.profile);
  std::vector<al::Observer> obs{
      {"sup_norm", [](double, const al::SequencePair& x) { return x.sup_norm(); }}};
  al::Trajectory tr = al::evolve(x0, R.spec, 0.0, c.numerics.t1, c.numerics.h,
                                 obs, c.numerics.stride);
  write_table(c, "initial_state", al::state_table(x0));
  write_table(c, "final_state", al::state_table(tr.final_state()));
  write_table(c, "series", al::series_table(tr));
  return json{{"samples", tr.times.size()},
              {"final_time", tr.times.back()},
              {"final_sup_norm", tr.final_state().sup_norm()}};
}

json run_hierarchy(const RunConfig& c, const Resolved& R) {
  al::SequencePair x0 = al::make_profile(R.win, c.profile);
  al::HierarchyCoeffs hc = al::general_coeffs(x0, R.spec);
  al::CsvTable t;
  t.columns = {"n"};
  auto add_cols = [&](const std::string& prefix, const al::Ladder& L) {
    for (size_t m = 0; m < L.g.size(); ++m) {
      t.columns.push_back(prefix + "_g" + std::to_string(m) + "_re");
      t.columns.push_back(prefix + "_g" + std::to_string(m) + "_im");
    }
    for (size_t m = 0; m < L.f.size(); ++m) {
      t.columns.push_back(prefix + "_f" + std::to_string(m) + "_re");
      t.columns.push_back(prefix + "_f" + std::to_string(m) + "_im");
      t.columns.push_back(prefix + "_h" + std::to_string(m) + "_re");
      t.columns.push_back(prefix + "_h" + std::to_string(m) + "_im");
    }
  };
  add_cols("plus", hc.plus);
  add_cols("minus", hc.minus);
  for (int n = R.win.n_min; n <= R.win.n_max; ++n) {
    std::vector<double> row{static_cast<double>(n)};
    auto add_vals = [&](const al::Ladder& L) {
      for (size_t m = 0; m < L.g.size(); ++m) {
        row.push_back(L.gv(m, n).real());
        row.push_back(L.gv(m, n).imag());
      }
      for (size_t m = 0; m < L.f.size(); ++m) {
        row.push_back(L.fv(m, n).real());
        row.push_back(L.fv(m, n).imag());
        row.push_back(L.hv(m, n).real());
        row.push_back(L.hv(m, n).imag());
      }
    };
    add_vals(hc.plus);
    add_vals(hc.minus);
    t.rows.push_back(std::move(row));
  }
  write_table(c, "ladders", t);
  al::ConstraintReport cr = al::check_constraint(R.spec);
  return json{{"plus_valid", {hc.plus.valid_lo, hc.plus.valid_hi}},
              {"minus_valid", {hc.minus.valid_lo, hc.minus.valid_hi}},
              {"constraint",
               {{"sum_excluding_top", cplx_json(cr.sum_excluding_top)},
                {"sum_including_top", cplx_json(cr.sum_including_top)},
                {"ok_excluding_top", cr.ok_excluding_top},
                {"ok_including_top", cr.ok_including_top}}}};
}

json run_check(const RunConfig& c, const Resolved&, int& exit_code) {
  al::CheckSuite suite = al::run_acceptance_suite(c.seed);
  json rows = json::array();
  for (const auto& r : suite.rows) {
    std::cout << (r.passed ? "PASS" : "FAIL") << "  " << r.id << ". " << r.name
              << ": " << r.detail << "\n";
    rows.push_back({{"id", r.id},
                    {"name", r.name},
                    {"passed", r.passed},
                    {"detail", r.detail}});
  }
  write_json_file(fs::path(c.output.dir) / "checks.json",
                  json{{"rows", rows}, {"all_passed", suite.all_passed()}});
  if (!suite.all_passed()) exit_code = 3;
  return json{{"all_passed", suite.all_passed()},
              {"rows_passed",
               std::count_if(suite.rows.begin(), suite.rows.end(),
                             [](const al::CheckResult& r) { return r.passed; })},
              {"rows_total", suite.rows.size()}};
}

json run_closeness(const RunConfig& c, const Resolved& R) {
  al::SequencePair bg = al::make_profile(R.win, c.profile);
  al::SequencePair pert = bg;
  if (!R.win.contains(c.closeness.perturb_site))
    throw al::validation_error("closeness: perturb_site outside the window");
  pert.alpha(c.closeness.perturb_site) += c.closeness.perturb_amp;
  al::Weight wt = build_weight(c.closeness, R.win);
  al::ClosenessReport rep =
      al::closeness_run(bg, pert, wt, c.closeness.p, R.spec, c.numerics.t1,
                        c.numerics.h, c.numerics.stride, c.closeness.slack);
  write_table(c, "delta",
              al::norm_series_table(rep.times, rep.delta_norm, "delta_norm"));
  return json{{"fitted_C", rep.fit.C},
              {"fitted_D", rep.fit.D},
              {"envelope_ok", rep.envelope_ok},
              {"max_ratio", rep.fit.max_ratio},
              {"delta_initial", rep.delta_norm.front()},
              {"delta_final", rep.delta_norm.back()}};
}

json run_asymptotics(const RunConfig& c, const Resolved& R) {
  if (!R.spec.is_al_system() &&
      !al::check_constraint(R.spec).ok_excluding_top)
    std::cerr << "warning: flow constants violate the summed-constant "
                 "constraint; the tail-preservation claim is outside its "
                 "hypotheses\n";
  al::AsymptoticsReport rep = al::asymptotics_run(
      c.asym.a, c.asym.b, c.asym.delta, R.spec, c.numerics.t1, c.asym.windows,
      c.asym.p, c.numerics.h, c.asym.margin, c.numerics.stride);
  al::CsvTable t;
  t.columns.push_back("time");
  for (const auto& wres : rep.windows)
    t.columns.push_back("residual_w" + std::to_string(wres.win.size()));
  const auto& times = rep.windows.front().times;
  for (size_t k = 0; k < times.size(); ++k) {
    std::vector<double> row{times[k]};
    for (const auto& wres : rep.windows) row.push_back(wres.residual[k]);
    t.rows.push_back(std::move(row));
  }
  write_table(c, "residuals", t);
  json windows = json::array();
  for (const auto& wres : rep.windows)
    windows.push_back({{"size", wres.win.size()},
                       {"hypothesis_sup", wres.hypothesis_sup},
                       {"hypothesis_diff", wres.hypothesis_diff},
                       {"final_residual", wres.final_residual}});
  return json{{"stability_ratio", rep.stability_ratio},
              {"weight_exponent", rep.weight_exponent},
              {"out_of_hypothesis", rep.out_of_hypothesis},
              {"constraint_ok", rep.constraint_ok},
              {"windows", windows}};
}

json run_spectrum(const RunConfig& c, const Resolved& R) {
  al::SequencePair x0 = al::make_profile(R.win, c.profile);
  al::SequencePair x1 =
      al::evolve(x0, R.spec, 0.0, c.numerics.t1, c.numerics.h, {}, 1 << 30)
          .final_state();
  al::LaxBundle b0 = al::build_L(x0);
  al::LaxBundle b1 = al::build_L(x1);
  std::vector<al::cplx> s0 = al::spectrum(b0.L);
  std::vector<al::cplx> s1 = al::spectrum(b1.L);
  al::DriftReport drift = al::eigen_drift(s0, s1);
  al::CsvTable t;
  t.columns = {"index", "initial_re", "initial_im", "final_re", "final_im"};
  for (size_t k = 0; k < s0.size(); ++k)
    t.rows.push_back({static_cast<double>(k), s0[k].real(), s0[k].imag(),
                      s1[k].real(), s1[k].imag()});
  write_table(c, "spectrum", t);
  return json{{"max_drift", drift.max_drift},
              {"mean_drift", drift.mean_drift},
              {"initial_inverse_ok", b0.inv_ok},
              {"initial_inverse_residual", b0.inv_residual},
              {"branch_flagged_sites", b0.branch_flagged.size()}};
}

json run_support(const RunConfig& c, const Resolved& R) {
  al::SequencePair x0 = al::make_profile(R.win, c.profile);
  al::SupportSpreadReport rep =
      al::support_spread_run(x0, R.spec, c.numerics.h);
  al::CsvTable t;
  t.columns = {"site", "alpha_abs", "beta_abs"};
  if (rep.has_support) {
    t.rows.push_back({static_cast<double>(rep.left_site), rep.alpha_left,
                      rep.beta_left});
    t.rows.push_back({static_cast<double>(rep.right_site), rep.alpha_right,
                      rep.beta_right});
  }
  write_table(c, "support", t);
  return json{{"has_support", rep.has_support},
              {"left_site", rep.left_site},
              {"right_site", rep.right_site},
              {"left_magnitude", rep.left_mag},
              {"right_magnitude", rep.right_mag},
              {"initial_sup_norm", rep.sup0},
              {"threshold", rep.threshold},
              {"spread_detected", rep.spread_detected}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice flow laboratory for the Ablowitz-Ladik hierarchy"};
  app.get_formatter()->column_width(28);
  // The step-size option is spelled --h; drop the default -h help short name
  // so the two can coexist.
  app.set_help_flag("--help", "print usage and exit");

  std::string command;
  app.add_option("command", command, "one of: evolve, hierarchy, check, "
                                     "closeness, asymptotics, spectrum, support")
      ->required()
      ->check(CLI::IsMember({"evolve", "hierarchy", "check", "closeness",
                             "asymptotics", "spectrum", "support"}));
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");
  std::string flow_preset;
  app.add_option("--flow", flow_preset, "flow preset: al, schur, phase")
      ->check(CLI::IsMember({"al", "schur", "phase"}));
  std::vector<int> r_flag;
  app.add_option("--r", r_flag, "hierarchy depths: R- R+")->expected(2);
  std::vector<double> c_plus_flag, c_minus_flag;
  app.add_option("--c-plus", c_plus_flag,
                 "real constants c_{0,+} .. c_{r+,+} (complex via config file)")
      ->expected(-1);
  app.add_option("--c-minus", c_minus_flag,
                 "real constants c_{0,-} .. c_{r-,-} (complex via config file)")
      ->expected(-1);
  std::vector<int> window_flag;
  app.add_option("--window", window_flag, "lattice window: NMIN NMAX")
      ->expected(2);
  std::string boundary_flag;
  app.add_option("--boundary", boundary_flag,
                 "pad_zero, periodic, or frozen_edges")
      ->check(CLI::IsMember({"pad_zero", "periodic", "frozen_edges"}));
  double h_flag = 0, t1_flag = 0;
  auto* h_opt = app.add_option("--h", h_flag, "integrator step size");
  auto* t1_opt = app.add_option("--t1", t1_flag, "final time");
  std::string out_flag;
  app.add_option("--out", out_flag, "output directory");
  std::string format_flag;
  app.add_option("--format", format_flag, "table format")
      ->check(CLI::IsMember({"csv", "json"}));
  std::uint64_t seed_flag = 0;
  auto* seed_opt = app.add_option("--seed", seed_flag, "seed for randomized rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  RunConfig cfg;
  cfg.command = command;
  // Per-command defaults that differ from the global ones: the operator
  // truncation wants an even window, support wants compactly supported data.
  if (command == "spectrum") {
    cfg.window.n_min = -64;
    cfg.window.n_max = 63;
  } else if (command == "support") {
    cfg.profile.kind = al::ProfileParams::Kind::compact;
    cfg.profile.a = al::cplx(0.5, 0);
    cfg.profile.b = al::cplx(0, 0);
    cfg.profile.n0 = 0;
    cfg.profile.n1 = 0;
  }

  int exit_code = 0;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in)
        throw al::validation_error("cannot read config file: " + config_path);
      json j;
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        throw al::validation_error(std::string("config parse error: ") +
                                   e.what());
      }
      apply_file(cfg, j);
      cfg.command = command;  // the positional always wins
    }
    if (const char* env = std::getenv("AL_OUT_DIR"); env && *env)
      cfg.output.dir = env;

    if (!flow_preset.empty()) cfg.flow.preset = flow_preset;
    if (!r_flag.empty()) {
      cfg.flow.r_minus = r_flag[0];
      cfg.flow.r_plus = r_flag[1];
      cfg.flow.preset = "custom";
    }
    if (!c_plus_flag.empty()) {
      cfg.flow.c_plus.assign(c_plus_flag.begin(), c_plus_flag.end());
      cfg.flow.preset = "custom";
    }
    if (!c_minus_flag.empty()) {
      cfg.flow.c_minus.assign(c_minus_flag.begin(), c_minus_flag.end());
      cfg.flow.preset = "custom";
    }
    if (!window_flag.empty()) {
      cfg.window.n_min = window_flag[0];
      cfg.window.n_max = window_flag[1];
    }
    if (!boundary_flag.empty()) cfg.window.boundary = boundary_flag;
    if (h_opt->count()) cfg.numerics.h = h_flag;
    if (t1_opt->count()) cfg.numerics.t1 = t1_flag;
    if (!out_flag.empty()) cfg.output.dir = out_flag;
    if (!format_flag.empty()) cfg.output.format = format_flag;
    if (seed_opt->count()) cfg.seed = seed_flag;

    Resolved R{build_flow(cfg.flow),
               al::make_window(cfg.window.n_min, cfg.window.n_max,
                               parse_boundary(cfg.window.boundary),
                               cfg.window.frozen_band)};

    fs::create_directories(cfg.output.dir);

    json manifest{{"tool", {{"name", al::tool_name}, {"version", al::tool_version}}},
                  {"command", cfg.command},
                  {"config", config_json(cfg, R.spec)}};

    auto started = std::chrono::steady_clock::now();
    try {
      json results;
      if (cfg.command == "evolve") results = run_evolve(cfg, R);
      else if (cfg.command == "hierarchy") results = run_hierarchy(cfg, R);
      else if (cfg.command == "check") results = run_check(cfg, R, exit_code);
      else if (cfg.command == "closeness") results = run_closeness(cfg, R);
      else if (cfg.command == "asymptotics") results = run_asymptotics(cfg, R);
      else if (cfg.command == "spectrum") results = run_spectrum(cfg, R);
      else if (cfg.command == "support") results = run_support(cfg, R);
      manifest["results"] = results;
    } catch (const al::blowup_error& e) {
      manifest["error"] = {{"type", "blowup"},
                           {"what", e.what()},
                           {"t_abort", e.t_abort},
                           {"sup_at_abort", e.sup_at_abort}};
      exit_code = 2;
    } catch (const al::numerical_error& e) {
      manifest["error"] = {{"type", "numerical"}, {"what", e.what()}};
      exit_code = 2;
    }
    manifest["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
            .count();
    write_json_file(fs::path(cfg.output.dir) / "manifest.json", manifest);

    if (exit_code == 2)
      std::cerr << "numerical abort: " << manifest["error"]["what"]
                << " (manifest written)\n";
    else
      std::cout << "wrote " << (fs::path(cfg.output.dir) / "manifest.json").string()
                << "\n";
  } catch (const al::validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}
