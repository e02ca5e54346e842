#ifndef ADZETA_GEOMETRY_HPP
#define ADZETA_GEOMETRY_HPP

// The stretched-circle family M_R: two profiled arcs joined by two necks
// of length 2R over the cut points {p, q}, the half manifolds M_{i,R},
// and the JSON configuration surface.
//
// Global circle coordinate: [arc1 | neck(q) | arc2 | neck(p)], total
// length l1 + l2 + 4R.  The ODE is psi' = -(B(t) + lambda G) psi in this
// coordinate; boundary traces at the p cut are read through the fiber's
// trace gauge kappa_p.

#include <functional>
#include <optional>

#include "adzeta/fiber.hpp"
#include "adzeta/types.hpp"

namespace adzeta {

struct ArcProfile {
  enum class Kind { constant, bump, samples };
  Kind kind = Kind::constant;
  double length = 1.0;
  // bump: W(u) = W0 + amplitude * exp(-1/(1-s^2)), s affine over the
  // support; support defaults to the interior (collar of length/8 kept
  // clear at both ends).
  Mat amplitude;
  double center = -1.0;  // <0: interior midpoint
  double width = -1.0;   // <0: whole interior
  // samples: piecewise-linear interpolation of (u, W) pairs
  std::vector<std::pair<double, Mat>> samples;

  double collar() const { return length / 8.0; }
  Mat eval_w(const Mat& W0, double u) const;
  bool is_constant() const { return kind == Kind::constant; }
  // collar invariant: W == W0 on [0, length/10] and [9 length/10, length]
  bool collar_ok(const Mat& W0) const;
};

struct ManifoldConfig {
  FiberStructure fiber;  // n_points = 2
  ArcProfile arc1, arc2;
  BoundaryInvolution sigma1, sigma2;  // empty when h_Y = 0
  double R = 4.0;
  double kappa = 0.75;
  double epsilon = 0.5;
  std::uint64_t seed = 1;
  std::vector<double> R_list;
  std::string name = "config";

  double total_length() const {
    return arc1.length + arc2.length + 4.0 * R;
  }
  ManifoldConfig with_R(double r) const {
    ManifoldConfig c = *this;
    c.R = r;
    return c;
  }
  void validate() const;  // involution + collar checks
};

// One straight piece of the operator: psi' = -(B(u) + lambda G) psi on
// [0, length].
struct Segment {
  double length = 0.0;
  bool constant = true;
  Mat B_const;
  std::function<Mat(double)> B;  // used when !constant
  Mat G;
  std::string label;

  Mat eval(double u) const { return constant ? B_const : B(u); }
};

Segment arc_segment(const FiberStructure& F, const ArcProfile& arc,
                    const std::string& label);
Segment neck_segment(const FiberStructure& F, double length,
                     const std::string& label);

// Circle descriptor: [arc1, neck(q, 2R), arc2, neck(p, 2R)].
struct ClosedDescriptor {
  FiberStructure fiber;
  double R = 0.0;
  std::vector<Segment> segments;
  double total_length() const;
};

ClosedDescriptor build_closed_operator(const ManifoldConfig& cfg);

// Half manifold with the ideal boundary condition P_i at the joint trace
// tau = (kappa_p psi(p cut)) ⊕ (psi(q cut)).
struct HalfDescriptor {
  FiberStructure fiber;
  int side = 1;
  double R = 0.0;   // length of each attached half neck
  Segment arc;
  Mat P;            // boundary projection on the y fiber
  bool p_at_left = true;  // side 1: p cut at the left end
  double total_length() const { return arc.length + 2.0 * R; }
};

std::pair<HalfDescriptor, HalfDescriptor> build_half_operators(
    const ManifoldConfig& cfg);

struct CountData {
  int h_Y = 0;
  int h_M = 0;
  int h1 = 0;
  int h2 = 0;
  int h = 0;
  int dim_L1_cap_L2 = 0;
  int l2_ker_1 = 0;
  int l2_ker_2 = 0;
};

// JSON configuration I/O (schema documented in the README).
ManifoldConfig load_config(const std::string& path);
ManifoldConfig parse_config(const std::string& json_text);
std::string config_to_json(const ManifoldConfig& cfg);

}  // namespace adzeta

#endif
