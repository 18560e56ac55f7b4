#include "krf/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "krf/errors.hpp"

namespace krf {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"geometry", {"n", "ell", "N"}},
      {"initial", {"kind", "modes", "amplitude", "seed"}},
      {"flow", {"kind", "scheme", "t_final", "sample_dt", "stop_tol", "C_cfl"}},
      {"output", {"dir", "checkpoint_every"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// 1-based line of `key` inside `[section]`, 0 if not found.
int line_of(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream is(text);
  std::string line, cur;
  int no = 0;
  while (std::getline(is, line)) {
    ++no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      cur = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq != std::string::npos && cur == section && trim(t.substr(0, eq)) == key) return no;
  }
  return 0;
}

struct Ctx {
  const std::string& text;
  std::string where(const std::string& sec, const std::string& key) const {
    const int ln = line_of(text, sec, key);
    std::string w = "key '" + sec + "." + key + "'";
    if (ln > 0) w += " (line " + std::to_string(ln) + ")";
    return w;
  }
};

template <class T>
T to_number(const Ctx& ctx, const std::string& sec, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  T out{};
  const auto* b = v.data();
  const auto* e = v.data() + v.size();
  auto r = std::from_chars(b, e, out);
  if (v.empty() || r.ec != std::errc() || r.ptr != e)
    raise(ErrorCode::ParseError, ctx.where(sec, key) + ": cannot parse '" + v + "' as a number");
  return out;
}

void need(bool ok, const std::string& what) {
  if (!ok) raise(ErrorCode::RangeError, what);
}

// Shortest representation that parses back to the same double.
std::string fmt_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

FlowKind parse_flow_kind(const std::string& s) {
  if (s == "krf") return FlowKind::krf;
  if (s == "e1_gradient") return FlowKind::e1_gradient;
  raise(ErrorCode::ParseError, "unknown flow kind '" + s + "' (expected krf | e1_gradient)");
}

Scheme parse_scheme(const std::string& s) {
  if (s == "bogacki_shampine") return Scheme::bogacki_shampine;
  if (s == "dormand_prince") return Scheme::dormand_prince;
  raise(ErrorCode::ParseError, "unknown scheme '" + s + "' (expected bogacki_shampine | dormand_prince)");
}

RunConfig parse_config_text(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    raise(ErrorCode::ParseError, "line " + std::to_string(e.line()) + ": " + e.message());
  }
  const Ctx ctx{text};
  RunConfig c;
  for (const auto& [sec, body] : tree) {
    const auto it = schema().find(sec);
    if (body.empty()) {
      // A top-level key (no section) or an empty section.
      if (!body.data().empty() || it == schema().end())
        raise(ErrorCode::ParseError, "unknown key or section '" + sec + "'");
      continue;
    }
    if (it == schema().end()) raise(ErrorCode::ParseError, "unknown section '[" + sec + "]'");
    for (const auto& [key, node] : body) {
      if (!it->second.count(key)) raise(ErrorCode::ParseError, "unknown " + ctx.where(sec, key));
      const std::string v = trim(node.data());
      if (sec == "geometry") {
        if (key == "n") c.n = to_number<int>(ctx, sec, key, v);
        else if (key == "ell") c.ell = to_number<int>(ctx, sec, key, v);
        else c.N = to_number<int>(ctx, sec, key, v);
      } else if (sec == "initial") {
        if (key == "kind") c.initial = v;
        else if (key == "modes") c.modes = v;
        else if (key == "amplitude") c.amplitude = to_number<double>(ctx, sec, key, v);
        else c.seed = to_number<std::uint64_t>(ctx, sec, key, v);
      } else if (sec == "flow") {
        try {
          if (key == "kind") c.flow_kind = parse_flow_kind(v);
          else if (key == "scheme") c.scheme = parse_scheme(v);
        } catch (const Error& e) {
          raise(ErrorCode::ParseError, ctx.where(sec, key) + ": " + e.what());
        }
        if (key == "t_final") c.t_final = to_number<double>(ctx, sec, key, v);
        else if (key == "sample_dt") c.sample_dt = to_number<double>(ctx, sec, key, v);
        else if (key == "stop_tol") c.stop_tol = to_number<double>(ctx, sec, key, v);
        else if (key == "C_cfl") c.C_cfl = to_number<double>(ctx, sec, key, v);
      } else {
        if (key == "dir") c.output_dir = v;
        else c.checkpoint_every = to_number<int>(ctx, sec, key, v);
      }
    }
  }
  validate(c);
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) raise(ErrorCode::IoError, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

void validate(const RunConfig& c) {
  need(c.n >= 1 && c.n <= 8, "geometry.n must be in [1, 8]");
  need(c.ell >= 1 && c.ell <= 64, "geometry.ell must be in [1, 64]");
  need(c.N >= 16 && c.N <= 2048, "geometry.N must be in [16, 2048] (got " + std::to_string(c.N) + ")");
  need(c.initial == "fubini_study" || c.initial == "perturbed",
       "initial.kind must be fubini_study or perturbed");
  need(std::isfinite(c.amplitude) && c.amplitude >= 0.0 && c.amplitude < 1.0, "initial.amplitude must be in [0, 1)");
  need(std::isfinite(c.t_final) && c.t_final > 0.0 && c.t_final <= 1e6, "flow.t_final must be in (0, 1e6]");
  need(std::isfinite(c.sample_dt) && c.sample_dt > 0.0 && c.sample_dt <= c.t_final,
       "flow.sample_dt must be in (0, t_final]");
  need(std::isfinite(c.stop_tol) && c.stop_tol >= 0.0 && c.stop_tol < 1.0, "flow.stop_tol must be in [0, 1)");
  need(std::isfinite(c.C_cfl) && c.C_cfl > 0.0 && c.C_cfl <= 1.0, "flow.C_cfl must be in (0, 1]");
  need(c.checkpoint_every >= 0, "output.checkpoint_every must be >= 0");
  need(!c.output_dir.empty(), "output.dir must not be empty");
  if (c.initial == "perturbed") parse_modes(c.modes, c.seed);
}

std::string to_ini(const RunConfig& c) {
  std::ostringstream os;
  os << "[geometry]\n"
     << "n = " << c.n << "\n"
     << "ell = " << c.ell << "\n"
     << "N = " << c.N << "\n\n"
     << "[initial]\n"
     << "kind = " << c.initial << "\n"
     << "modes = " << c.modes << "\n"
     << "amplitude = " << fmt_double(c.amplitude) << "\n"
     << "seed = " << c.seed << "\n\n"
     << "[flow]\n"
     << "kind = " << to_string(c.flow_kind) << "\n"
     << "scheme = " << to_string(c.scheme) << "\n"
     << "t_final = " << fmt_double(c.t_final) << "\n"
     << "sample_dt = " << fmt_double(c.sample_dt) << "\n"
     << "stop_tol = " << fmt_double(c.stop_tol) << "\n"
     << "C_cfl = " << fmt_double(c.C_cfl) << "\n\n"
     << "[output]\n"
     << "dir = " << c.output_dir << "\n"
     << "checkpoint_every = " << c.checkpoint_every << "\n";
  return os.str();
}

ModeSpec parse_modes(const std::string& spec, std::uint64_t seed) {
  ModeSpec m;
  if (trim(spec) == "random") {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double mx = 0.0;
    for (int k = 1; k <= 4; ++k) {
      m.emplace_back(k, U(rng));
      mx = std::max(mx, std::abs(m.back().second));
    }
    for (auto& kc : m) kc.second /= mx;
    return m;
  }
  std::istringstream is(spec);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    const Ctx ctx{spec};
    if (colon == std::string::npos) raise(ErrorCode::ParseError, "mode '" + item + "' is not of the form k:c");
    const int k = to_number<int>(ctx, "initial", "modes", item.substr(0, colon));
    const double coef = to_number<double>(ctx, "initial", "modes", item.substr(colon + 1));
    if (k < 0 || k > 64) raise(ErrorCode::RangeError, "mode degree must be in [0, 64]");
    m.emplace_back(k, coef);
  }
  if (m.empty()) raise(ErrorCode::ParseError, "initial.modes is empty");
  return m;
}

RadialProfile initial_profile(const RunConfig& c) {
  const auto cls = ClassData::canonical(c.n, c.ell);
  if (c.initial == "fubini_study") return make_fubini_study(cls, c.N);
  return make_perturbed(cls, c.N, c.amplitude, parse_modes(c.modes, c.seed));
}

RunSpec to_run_spec(const RunConfig& c) {
  const auto p = initial_profile(c);
  RunSpec s;
  s.cls = p.cls();
  s.N = c.N;
  s.kind = c.flow_kind;
  s.initial_u = p.u();
  s.t_final = c.t_final;
  s.sample_dt = c.sample_dt;
  s.stop_tol = c.stop_tol;
  s.step.kind = c.flow_kind;
  s.step.scheme = c.scheme;
  s.step.C_cfl = c.C_cfl;
  return s;
}

}  // namespace krf
