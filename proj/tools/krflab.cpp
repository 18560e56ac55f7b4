// krflab: batch driver for normalized Kahler-Ricci flow experiments on
// U(n)-invariant metrics.
//
//   krflab run <config.ini>
//   krflab inspect <run-dir/manifest.json>
//   krflab oracle "n=2;x=1.3;amp=0.02;modes=2:1,3:-0.5"
//
// Exit status is 0 on success and otherwise one of the stable error codes
// listed in the README.

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "krf/config.hpp"
#include "krf/errors.hpp"
#include "krf/geometry.hpp"
#include "krf/oracle.hpp"
#include "krf/run_io.hpp"

using namespace krf;

namespace {

std::map<std::string, std::string> parse_point_spec(const std::string& spec) {
  std::map<std::string, std::string> kv;
  std::istringstream is(spec);
  std::string item;
  while (std::getline(is, item, ';')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) raise(ErrorCode::ParseError, "point-spec item '" + item + "' is not key=value");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  static const char* known[] = {"n", "ell", "N", "x", "amp", "modes", "seed", "h"};
  for (const auto& [k, v] : kv)
    if (std::none_of(std::begin(known), std::end(known), [&](const char* s) { return k == s; }))
      raise(ErrorCode::ParseError, "unknown point-spec key '" + k + "'");
  return kv;
}

double num(const std::map<std::string, std::string>& kv, const std::string& k, double def) {
  const auto it = kv.find(k);
  if (it == kv.end()) return def;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(k);
    return v;
  } catch (const std::exception&) {
    raise(ErrorCode::ParseError, "point-spec key '" + k + "': cannot parse '" + it->second + "'");
  }
}

// Evaluates the coordinate oracle at one point and prints it next to the
// radial fields interpolated at the same moment coordinate.
int oracle_cmd(const std::string& spec) {
  const auto kv = parse_point_spec(spec);
  const int n = static_cast<int>(num(kv, "n", 1));
  const int ell = static_cast<int>(num(kv, "ell", 1));
  const int N = static_cast<int>(num(kv, "N", 256));
  if (n < 1 || n > 4) raise(ErrorCode::RangeError, "oracle supports n in [1, 4]");
  const auto cls = ClassData::canonical(n, ell);
  const double L = cls.class_scale;
  const double x = num(kv, "x", 0.5 * L);
  const double amp = num(kv, "amp", 0.0);
  const double h = num(kv, "h", 0.04);
  const auto modes = parse_modes(kv.count("modes") ? kv.at("modes") : "2:1", static_cast<std::uint64_t>(num(kv, "seed", 1)));
  if (!(x > 0.0 && x < L)) raise(ErrorCode::RangeError, "x must lie strictly inside (0, class_scale)");

  const auto p = make_perturbed(cls, N, amp, modes);
  const auto g = analyze(p);
  const auto F = radial_potential(cls, [&](double s) { return perturbation_value(cls, amp, modes, s); });
  std::vector<std::complex<double>> dir(n, {1.0, 0.0});
  const auto pt = point_at_moment(x, L, dir);
  const auto t = oracle_curvature_at(F, pt, h);
  const auto fc = radial_frame(t, pt);

  const auto& c = g.curv;
  auto at = [&](const std::vector<double>& f) { return f.empty() ? std::nan("") : p.grid().interpolate(f, x); };
  nlohmann::ordered_json out;
  out["n"] = n;
  out["ell"] = ell;
  out["x"] = x;
  out["z_norm"] = pt.norm();
  out["richardson_gap"] = t.richardson_gap;
  out["ricci_logdet_mismatch"] = (t.ric - t.ric_logdet).norm();
  const std::pair<const char*, std::pair<double, double>> rows[] = {
      {"R", {fc.R, at(c.R)}},
      {"ric_radial", {fc.ric_r, at(c.ric_radial)}},
      {"ric_transverse", {fc.ric_t, at(c.ric_transverse)}},
      {"B_rr", {fc.B_rr, at(c.B_rr)}},
      {"B_rt", {fc.B_rt, at(c.B_rt)}},
      {"B_tt", {fc.B_tt, at(c.B_tt)}},
      {"B_tu", {fc.B_tu, at(c.B_tu)}},
  };
  for (const auto& [name, v] : rows) {
    if (std::isnan(v.second)) continue;
    if (n < 3 && std::string(name) == "B_tu") continue;  // needs two transverse directions
    out["fields"][name] = {{"oracle", v.first}, {"radial", v.second}, {"diff", v.first - v.second}};
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"krflab: normalized Kahler-Ricci flow lab for U(n)-invariant metrics"};
  app.set_version_flag("--version", code_version());
  app.require_subcommand(1);

  std::string config_path, manifest_path, point_spec;
  auto* run = app.add_subcommand("run", "Run a flow from an INI config");
  run->add_option("config", config_path, "Config file")->required();
  auto* ins = app.add_subcommand("inspect", "Summarize a run manifest and verify its digests");
  ins->add_option("manifest", manifest_path, "manifest.json of a run")->required();
  auto* orc = app.add_subcommand("oracle", "Evaluate the coordinate oracle at one point");
  orc->add_option("point-spec", point_spec, "e.g. \"n=2;x=1.3;amp=0.02;modes=2:1,3:-0.5\"")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = parse_config(config_path);
      std::cerr << "# effective configuration\n" << to_ini(cfg);
      return execute(cfg, std::cerr).exit_code;
    }
    if (*ins) return inspect(manifest_path, std::cout);
    if (*orc) return oracle_cmd(point_spec);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorCode::Internal);
  }
  return 0;
}
