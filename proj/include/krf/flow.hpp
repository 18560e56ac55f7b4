#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "krf/geometry.hpp"

namespace krf {

enum class FlowKind { krf, e1_gradient };
enum class Scheme { bogacki_shampine, dormand_prince };

const char* to_string(FlowKind k);
const char* to_string(Scheme s);

// Time-stamped potential.  The potential is phi = osc + shift: `osc` carries
// all geometry and has a conserved background average, `shift` is the
// spatially constant mode that the normalized flow amplifies like e^t.
struct FlowState {
  double t = 0.0;
  ClassData cls;
  std::vector<double> osc;
  double shift = 0.0;
  std::vector<double> osc_dot;  // d osc / dt
  double shift_dot = 0.0;
  // Integrated along the trajectory with the same Runge-Kutta weights:
  // J[k] for k = 0..n (J[n] stays 0) and the cumulative (1/V) int (R - r)^2.
  std::vector<double> J;
  double cumulative_L2R = 0.0;
  std::vector<double> J_dot;  // rates at t
  double L2R = 0.0;           // (1/V) int (R - r)^2 at t

  std::shared_ptr<const RadialProfile> profile;  // FS background + osc
  std::shared_ptr<const Geometry> geometry;

  std::vector<double> phi() const;      // osc + shift
  std::vector<double> phi_dot() const;  // osc_dot + shift_dot
  const CurvatureFields& curvature() const { return geometry->curv; }
};

struct StepOptions {
  FlowKind kind = FlowKind::krf;
  Scheme scheme = Scheme::bogacki_shampine;
  double C_cfl = 0.2;
  double atol = 1e-10;
  double rtol = 1e-8;
  int max_halvings = 20;
};

// Initial state from a profile on the Fubini-Study background of its class.
FlowState make_state(const RadialProfile& p, FlowKind kind, double t0 = 0.0);

// Right sides as full grid functions.  `h` is the background Ricci potential
// (zero for the Fubini-Study background used throughout).
std::vector<double> krf_rhs(const FlowState& s, std::span<const double> h);
std::vector<double> e1_gradient_rhs(const FlowState& s);

// Largest dt allowed by the explicit stability policy at state s.
double stability_cap(const FlowState& s, const StepOptions& opt);

struct StepResult {
  FlowState state;
  double dt_used = 0.0;
  double dt_next = 0.0;  // controller suggestion
  int rejections = 0;
};
StepResult step(const FlowState& s, double dt, const StepOptions& opt);

struct RunSpec {
  ClassData cls;
  int N = 128;
  FlowKind kind = FlowKind::krf;
  std::vector<double> initial_u;  // relative potential on the FS background
  double t_final = 10.0;
  double sample_dt = 0.05;
  double stop_tol = 1e-16;
  StepOptions step;
};

enum class Termination { converged, t_final, error };
const char* to_string(Termination t);

struct RunSummary {
  Termination reason = Termination::t_final;
  FlowState final_state;
  int samples = 0;
  long steps = 0;
  long rejections = 0;
};

// Integrates from spec.initial_u, landing exactly on multiples of sample_dt.
// `on_sample` is called at t = 0 and every sample time; returning false stops
// the run (treated as converged).  Errors propagate as exceptions.
RunSummary run(const RunSpec& spec, const std::function<bool(const FlowState&)>& on_sample);

}  // namespace krf
