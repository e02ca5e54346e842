#include "adzeta/geometry.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace adzeta {

using nlohmann::json;

Mat ArcProfile::eval_w(const Mat& W0, double u) const {
  switch (kind) {
    case Kind::constant:
      return W0;
    case Kind::bump: {
      double c = (center >= 0) ? center : 0.5 * length;
      double w = (width > 0) ? width : (length - 2.0 * collar());
      double s = 2.0 * (u - c) / w;
      if (std::abs(s) >= 1.0) return W0;
      return W0 + std::exp(-1.0 / (1.0 - s * s)) * amplitude;
    }
    case Kind::samples: {
      if (samples.empty()) return W0;
      if (u <= samples.front().first) return samples.front().second;
      if (u >= samples.back().first) return samples.back().second;
      for (size_t i = 1; i < samples.size(); ++i) {
        if (u <= samples[i].first) {
          double t = (u - samples[i - 1].first) /
                     (samples[i].first - samples[i - 1].first);
          return (1.0 - t) * samples[i - 1].second + t * samples[i].second;
        }
      }
      return samples.back().second;
    }
  }
  return W0;
}

bool ArcProfile::collar_ok(const Mat& W0) const {
  const double c = length / 10.0;
  for (double frac : {0.0, 0.3, 0.7, 1.0}) {
    double u_lo = frac * c;
    double u_hi = length - frac * c;
    if ((eval_w(W0, u_lo) - W0).norm() > 1e-12) return false;
    if ((eval_w(W0, u_hi) - W0).norm() > 1e-12) return false;
  }
  if (kind == Kind::bump) {
    double c0 = (center >= 0) ? center : 0.5 * length;
    double w = (width > 0) ? width : (length - 2.0 * collar());
    if (c0 - 0.5 * w < c - 1e-12 || c0 + 0.5 * w > length - c + 1e-12)
      return false;
  }
  return true;
}

void ManifoldConfig::validate() const {
  require(fiber.n_points == 2, "config: fiber must cover both cut points");
  require(R >= 0.0, "config: R must be nonnegative");
  require(kappa > 0.0 && kappa < 1.0, "config: kappa in (0,1)");
  require(epsilon > 0.0 && epsilon < 1.0, "config: epsilon in (0,1)");
  require(arc1.collar_ok(fiber.W0), "config: arc1 violates the collar");
  require(arc2.collar_ok(fiber.W0), "config: arc2 violates the collar");
  if (fiber.h_Y > 0) {
    require(sigma1.sigma.rows() == fiber.h_Y, "config: sigma1 has wrong size");
    require(sigma2.sigma.rows() == fiber.h_Y, "config: sigma2 has wrong size");
    check_involution(sigma1.sigma);
    check_involution(sigma2.sigma);
  }
}

Segment arc_segment(const FiberStructure& F, const ArcProfile& arc,
                    const std::string& label) {
  Segment s;
  s.length = arc.length;
  s.label = label;
  s.G = F.G;
  if (arc.is_constant()) {
    s.constant = true;
    s.B_const = F.B0;
  } else {
    s.constant = false;
    const Mat W0 = F.W0;
    const int m = F.m;
    ArcProfile prof = arc;
    s.B = [prof, W0, m](double u) {
      Mat W = prof.eval_w(W0, u);
      Mat B = Mat::Zero(2 * m, 2 * m);
      B.topRightCorner(m, m) = W.adjoint();
      B.bottomLeftCorner(m, m) = W;
      return B;
    };
  }
  return s;
}

Segment neck_segment(const FiberStructure& F, double length,
                     const std::string& label) {
  Segment s;
  s.length = length;
  s.constant = true;
  s.B_const = F.B0;
  s.G = F.G;
  s.label = label;
  return s;
}

double ClosedDescriptor::total_length() const {
  double L = 0;
  for (const auto& s : segments) L += s.length;
  return L;
}

ClosedDescriptor build_closed_operator(const ManifoldConfig& cfg) {
  cfg.validate();
  ClosedDescriptor d;
  d.fiber = cfg.fiber;
  d.R = cfg.R;
  d.segments.push_back(arc_segment(cfg.fiber, cfg.arc1, "arc1"));
  d.segments.push_back(neck_segment(cfg.fiber, 2.0 * cfg.R, "neck_q"));
  d.segments.push_back(arc_segment(cfg.fiber, cfg.arc2, "arc2"));
  d.segments.push_back(neck_segment(cfg.fiber, 2.0 * cfg.R, "neck_p"));
  return d;
}

std::pair<HalfDescriptor, HalfDescriptor> build_half_operators(
    const ManifoldConfig& cfg) {
  cfg.validate();
  HalfDescriptor h1, h2;
  h1.fiber = h2.fiber = cfg.fiber;
  h1.side = 1;
  h2.side = 2;
  h1.R = h2.R = cfg.R;
  h1.arc = arc_segment(cfg.fiber, cfg.arc1, "arc1");
  h2.arc = arc_segment(cfg.fiber, cfg.arc2, "arc2");
  h1.p_at_left = true;
  h2.p_at_left = false;
  const BoundaryInvolution* s1 = cfg.fiber.h_Y > 0 ? &cfg.sigma1 : nullptr;
  const BoundaryInvolution* s2 = cfg.fiber.h_Y > 0 ? &cfg.sigma2 : nullptr;
  h1.P = aps_projection(cfg.fiber, s1, 1).P;
  h2.P = aps_projection(cfg.fiber, s2, 2).P;
  return {h1, h2};
}

// ---------------------------------------------------------------------
// JSON

namespace {

Mat parse_cmatrix(const json& j, const std::string& field) {
  if (!j.is_array()) throw invariant_error("config: " + field + " must be an array of rows");
  int rows = j.size();
  if (rows == 0) return Mat(0, 0);
  int cols = j[0].size();
  Mat M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols)
      throw invariant_error("config: ragged matrix in " + field);
    for (int k = 0; k < cols; ++k) {
      const auto& e = j[i][k];
      if (e.is_number()) {
        M(i, k) = cplx(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2) {
        M(i, k) = cplx(e[0].get<double>(), e[1].get<double>());
      } else {
        throw invariant_error("config: entry of " + field +
                              " must be a number or [re, im]");
      }
    }
  }
  return M;
}

json cmatrix_to_json(const Mat& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (int k = 0; k < M.cols(); ++k)
      row.push_back({M(i, k).real(), M(i, k).imag()});
    rows.push_back(row);
  }
  return rows;
}

ArcProfile parse_arc(const json& j, const std::string& field) {
  ArcProfile arc;
  if (!j.contains("length"))
    throw invariant_error("config: missing " + field + ".length");
  arc.length = j.at("length").get<double>();
  require(arc.length > 0, "config: " + field + ".length must be positive");
  std::string kind = "constant";
  if (j.contains("profile")) {
    const auto& p = j.at("profile");
    kind = p.value("kind", "constant");
    if (kind == "constant") {
      arc.kind = ArcProfile::Kind::constant;
    } else if (kind == "bump") {
      arc.kind = ArcProfile::Kind::bump;
      if (!p.contains("amplitude"))
        throw invariant_error("config: missing " + field +
                              ".profile.amplitude");
      arc.amplitude = parse_cmatrix(p.at("amplitude"), field + ".amplitude");
      arc.center = p.value("center", -1.0);
      arc.width = p.value("width", -1.0);
    } else if (kind == "samples") {
      arc.kind = ArcProfile::Kind::samples;
      if (!p.contains("samples"))
        throw invariant_error("config: missing " + field + ".profile.samples");
      for (const auto& s : p.at("samples")) {
        double u = s.at(0).get<double>();
        arc.samples.push_back({u, parse_cmatrix(s.at(1), field + ".samples")});
      }
    } else {
      throw invariant_error("config: unknown profile kind '" + kind + "'");
    }
  }
  return arc;
}

}  // namespace

ManifoldConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw invariant_error(std::string("config: JSON parse error: ") +
                          e.what());
  }
  for (const char* field : {"m", "W0", "arcs"}) {
    if (!j.contains(field))
      throw invariant_error(std::string("config: missing field '") + field +
                            "'");
  }
  ManifoldConfig cfg;
  int m = j.at("m").get<int>();
  require(m >= 1, "config: m must be >= 1");
  Mat W0 = parse_cmatrix(j.at("W0"), "W0");
  require(W0.rows() == m && W0.cols() == m, "config: W0 must be m x m");
  cfg.fiber = FiberStructure::standard(m, W0, 2);
  const auto& arcs = j.at("arcs");
  require(arcs.is_array() && arcs.size() == 2,
          "config: arcs must list exactly two arcs");
  cfg.arc1 = parse_arc(arcs[0], "arcs[0]");
  cfg.arc2 = parse_arc(arcs[1], "arcs[1]");
  if (cfg.fiber.h_Y > 0) {
    for (const char* field : {"sigma1", "sigma2"}) {
      if (!j.contains(field))
        throw invariant_error(std::string("config: missing field '") + field +
                              "' (required when ker B is nonzero)");
    }
    cfg.sigma1.sigma = parse_cmatrix(j.at("sigma1"), "sigma1");
    cfg.sigma2.sigma = parse_cmatrix(j.at("sigma2"), "sigma2");
  }
  if (j.contains("R")) cfg.R = j.at("R").get<double>();
  if (j.contains("R_list"))
    for (const auto& r : j.at("R_list")) cfg.R_list.push_back(r.get<double>());
  if (!cfg.R_list.empty()) cfg.R = cfg.R_list.front();
  cfg.kappa = j.value("kappa", 0.75);
  cfg.epsilon = j.value("epsilon", 0.5);
  cfg.seed = j.value("seed", 1);
  cfg.name = j.value("name", "config");
  cfg.validate();
  return cfg;
}

ManifoldConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invariant_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ManifoldConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["m"] = cfg.fiber.m;
  j["W0"] = cmatrix_to_json(cfg.fiber.W0);
  auto arc_json = [](const ArcProfile& a) {
    json p;
    p["length"] = a.length;
    switch (a.kind) {
      case ArcProfile::Kind::constant:
        p["profile"] = {{"kind", "constant"}};
        break;
      case ArcProfile::Kind::bump: {
        json prof;
        prof["kind"] = "bump";
        prof["amplitude"] = cmatrix_to_json(a.amplitude);
        if (a.center >= 0) prof["center"] = a.center;
        if (a.width > 0) prof["width"] = a.width;
        p["profile"] = prof;
        break;
      }
      case ArcProfile::Kind::samples: {
        json prof;
        prof["kind"] = "samples";
        json ss = json::array();
        for (const auto& s : a.samples)
          ss.push_back({s.first, cmatrix_to_json(s.second)});
        prof["samples"] = ss;
        p["profile"] = prof;
        break;
      }
    }
    return p;
  };
  j["arcs"] = {arc_json(cfg.arc1), arc_json(cfg.arc2)};
  if (cfg.fiber.h_Y > 0) {
    j["sigma1"] = cmatrix_to_json(cfg.sigma1.sigma);
    j["sigma2"] = cmatrix_to_json(cfg.sigma2.sigma);
  }
  j["R"] = cfg.R;
  j["R_list"] = cfg.R_list;
  j["kappa"] = cfg.kappa;
  j["epsilon"] = cfg.epsilon;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

}  // namespace adzeta
