#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "phlab/torus.hpp"

namespace phlab {

enum class MapKind { linear, perturbed_linear };
enum class PerturbationFrame { standard, eigenframe };

struct IntMatrix2 {
  long a = 1, b = 0, c = 0, d = 1;
  long det() const { return a * d - b * c; }
  Mat2 real() const {
    return {static_cast<double>(a), static_cast<double>(b), static_cast<double>(c),
            static_cast<double>(d)};
  }
  bool operator==(const IntMatrix2&) const = default;
};

struct Perturbation {
  TorusPoint q;
  double a_box = 0.0;
  double eps = 0.0;
  PerturbationFrame frame = PerturbationFrame::standard;
  bool operator==(const Perturbation&) const = default;
};

struct MapSpec {
  MapKind kind = MapKind::linear;
  IntMatrix2 matrix;
  std::optional<Perturbation> perturbation;

  bool operator==(const MapSpec&) const = default;

  // Throws ConfigError naming the violated invariant.
  void validate() const;

  static MapSpec linear(IntMatrix2 m);
  static MapSpec f_A();
  static MapSpec f_B();
  // Defaults put the support box inside the ball of radius 0.1 around q.
  static MapSpec example3(double eps = 0.01, double a_box = default_a_box());
  static MapSpec example4(double eps = 0.01, double a_box = default_a_box());
  static double default_a_box();
  // "f_A", "f_B", "example3", "example4".
  static MapSpec preset(const std::string& name);
};

nlohmann::json to_json(const MapSpec& spec);
// Accepts a preset name string or a full spec object; throws ConfigError.
MapSpec map_spec_from_json(const nlohmann::json& j);

// Eigen data of the integer matrix. Vectors are unit, with non-negative first
// nonzero component. lambda_* are signed eigenvalues.
struct LinearEigenData {
  bool dominated = false;
  double lambda_u = 0.0;
  double lambda_c = 0.0;
  Vec2 e_u{1.0, 0.0};
  Vec2 e_c{0.0, 1.0};
};

LinearEigenData linear_eigen_data(const IntMatrix2& m);

class Endomorphism {
 public:
  explicit Endomorphism(MapSpec spec);

  const MapSpec& spec() const { return spec_; }
  bool is_linear() const { return !spec_.perturbation.has_value(); }
  int degree() const { return static_cast<int>(cosets_.size()); }
  const Mat2& linear() const { return m_; }
  const LinearEigenData& eigen() const { return eig_; }

  TorusPoint evaluate(TorusPoint p) const;
  TorusPoint iterate(TorusPoint p, int n) const;
  // Lift F : R^2 -> R^2 with F(X + k) = F(X) + M k for integer k.
  Vec2 lift(Vec2 X) const;
  // Throws NumericalError if |det| < 1e-8.
  Mat2 derivative(TorusPoint p) const { return derivative_at(p.coords()); }
  Mat2 derivative_at(Vec2 X) const;
  // Jacobian of the perturbation phi alone (identity for linear maps).
  Mat2 perturbation_jacobian(Vec2 X) const;
  // F(X + delta) - F(X) without cancellation for small delta.
  Vec2 displace(Vec2 X, Vec2 delta) const;

  // All |det| preimages, ordered by coset representative.
  std::vector<TorusPoint> inverse_branches(TorusPoint p) const;
  TorusPoint inverse_branch(TorusPoint p, int branch) const;
  // Newton solve of F(Z) = target in R^2; branch only labels errors.
  Vec2 lifted_preimage(Vec2 target, Vec2 seed, int branch = -1) const;
  const std::vector<Vec2>& coset_representatives() const { return cosets_; }
  // Index of the branch of p that contains the preimage z.
  int branch_index(TorusPoint z, TorusPoint p) const;

  // Parameter intervals in [0,1] of the segment a + t (b - a) that meet a lattice copy of
  // the perturbation support. Outside them the lift is affine. Empty for linear maps.
  std::vector<std::pair<double, double>> nonaffine_intervals(Vec2 a, Vec2 b) const;
  double support_radius() const { return support_radius_; }

  // Minimal torus distance between distinct preimages of a point for the linear part.
  double linear_separation() const { return linear_tau_; }
  // Same quantity sampled over a grid for the actual map.
  double empirical_separation(int grid_n) const;
  double max_log_derivative_norm(int grid_n) const;

  Direction seed_unstable() const { return Direction::from_vector(eig_.e_u); }
  Direction seed_center() const { return Direction::from_vector(eig_.e_c); }
  // max(40, ceil(37 / ln(|lambda_u| / |lambda_c|))): enough for (lc/lu)^depth < 1e-16.
  int default_depth() const;

 private:
  struct Chart {
    bool inside = false;
    double u = 0.0, c = 0.0;  // chart coordinates of the displacement from the nearest q
  };
  Chart chart_of(Vec2 X) const;

  MapSpec spec_;
  Mat2 m_;
  IntMatrix2 adj_;
  long det_ = 0;
  LinearEigenData eig_;
  std::vector<Vec2> cosets_;
  std::vector<std::pair<long, long>> coset_keys_;
  double linear_tau_ = 0.0;
  // perturbation data
  Vec2 q_;
  double a_ = 0.0, eps_ = 0.0;
  Vec2 fu_{1.0, 0.0}, fc_{0.0, 1.0};  // frame vectors
  Mat2 frame_inv_;
  double support_radius_ = 0.0;
};

struct ConeField {
  Direction center;
  double half_width = 0.0;
  // Angular clearance of d inside the cone (negative when outside).
  double clearance(Direction d) const;
  static ConeField from_slopes(double lo, double hi);
};

struct ConeCertificate {
  int ell = 1;
  double sigma = 0.0;
  int grid_n = 0;
  double margin = 0.0;
  bool verified = false;
  int worst_i = -1, worst_j = -1;
  int directions_per_point = 0;
  double injectivity_tau = 0.0;
};

ConeCertificate certify_cones(const Endomorphism& f, const ConeField& cone, int ell, int grid_n,
                              int interior_samples = 15);

nlohmann::json to_json(const ConeCertificate& c);

}  // namespace phlab
