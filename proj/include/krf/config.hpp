#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "krf/flow.hpp"
#include "krf/profile.hpp"

namespace krf {

// Run configuration.  The file format is INI with four sections:
//
//   [geometry]  n, ell, N
//   [initial]   kind (fubini_study | perturbed), modes, amplitude, seed
//   [flow]      kind (krf | e1_gradient), scheme, t_final, sample_dt,
//               stop_tol, C_cfl
//   [output]    dir, checkpoint_every
//
// Every key is optional and unknown sections or keys are rejected.
// `modes` is either a list "k:c, k:c, ..." of Legendre degrees with
// coefficients, or "random" (four coefficients drawn from `seed`).
struct RunConfig {
  int n = 1;
  int ell = 1;
  int N = 128;
  std::string initial = "fubini_study";
  std::string modes = "2:1";
  double amplitude = 0.02;
  std::uint64_t seed = 1;
  FlowKind flow_kind = FlowKind::krf;
  Scheme scheme = Scheme::bogacki_shampine;
  double t_final = 10.0;
  double sample_dt = 0.05;
  double stop_tol = 1e-16;
  double C_cfl = 0.2;
  std::string output_dir = "krf_out";
  int checkpoint_every = 0;  // 0 disables checkpoints

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);
void validate(const RunConfig& c);

// Echo with every field present; parse_config_text(to_ini(c)) == c.
std::string to_ini(const RunConfig& c);

ModeSpec parse_modes(const std::string& spec, std::uint64_t seed);
RadialProfile initial_profile(const RunConfig& c);
RunSpec to_run_spec(const RunConfig& c);

FlowKind parse_flow_kind(const std::string& s);
Scheme parse_scheme(const std::string& s);

}  // namespace krf
