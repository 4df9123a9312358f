#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace wkam {

enum class Family { Mechanical, ShiftedKinetic, TravelingWave };

/// Parses "Mechanical", "ShiftedKinetic" or "TravelingWave"; anything else is
/// a ConfigurationError.
Family parse_family(std::string_view tag);
std::string_view to_string(Family family);

/// One Fourier mode c_cos*cos(2*pi*theta) + c_sin*sin(2*pi*theta) with
/// theta = freq_x*x + freq_t*t.
struct PotentialTerm {
  int freq_x = 0;
  int freq_t = 0;
  double c_cos = 0.0;
  double c_sin = 0.0;
};

/// Finite trigonometric series on the torus (or torus x circle). Phases are
/// reduced modulo one before the cosine is taken, so V(x+1,t) and V(x,t+1)
/// agree with V(x,t) to rounding.
class Potential {
public:
  struct Derivatives {
    double v = 0.0;
    double v_x = 0.0;
    double v_xx = 0.0;
    double v_t = 0.0;
    double v_xt = 0.0;
  };

  Potential() = default;
  explicit Potential(std::vector<PotentialTerm> terms);

  Derivatives eval(double x, double t = 0.0) const;
  double value(double x, double t = 0.0) const { return eval(x, t).v; }

  bool time_dependent() const;
  /// True when every spatial frequency is a multiple of k, i.e. V is 1/k-periodic in x.
  bool period_divides(int k) const;
  const std::vector<PotentialTerm>& terms() const { return terms_; }

private:
  std::vector<PotentialTerm> terms_;
};

/// V(x) = -sin^2(2 pi x) (1 + cos(2 pi x)/2), maxima at 0 and 1/2 with
/// V'' = -12 pi^2 and -4 pi^2 respectively.
Potential benchmark_potential();

/// Value and derivatives of H at one point of T*M x S^1.
struct Jet {
  double H = 0.0;
  double H_p = 0.0;
  double H_x = 0.0;
  double H_t = 0.0;
  double H_pp = 0.0;
  double H_xp = 0.0;
  double H_xx = 0.0;
};

struct LagrangianValue {
  double L = 0.0;
  double L_v = 0.0;
};

/// Closed-form Hamiltonian families on the circle:
///   Mechanical      H = p^2/2 + V(x)
///   ShiftedKinetic  H = (p+P)^2/2 + V(x,t)
///   TravelingWave   H = p^2/2 - p/k + V(x + t/k), V 1/k-periodic
/// All three share the normal form H = (p+s)^2/2 + o + W(x,t) with W a
/// trigonometric series in (x,t). A model may additionally carry an integer
/// rescaling N, evaluating H_N(x,p,t) = H(x, N p, N t).
class HamiltonianModel {
public:
  static HamiltonianModel mechanical(Potential V, double growth_constant = 1.0);
  static HamiltonianModel shifted_kinetic(Potential V, double momentum_shift,
                                          double growth_constant = 1.0);
  static HamiltonianModel traveling_wave(Potential V, int wind, double growth_constant = 1.0);

  /// H_N(x,p,t) = H(x, N p, N t). Rescaling composes multiplicatively.
  HamiltonianModel rescaled(int N) const;

  Family family() const { return family_; }
  const Potential& potential() const { return base_; }
  double momentum_shift() const { return momentum_shift_; }
  int wind() const { return wind_; }
  double growth_constant() const { return growth_constant_; }
  int dimension() const { return 1; }
  int rescale() const { return rescale_; }
  double convexity_floor() const { return convexity_floor_; }
  void set_convexity_floor(double floor) { convexity_floor_ = floor; }

  Jet jet(double x, double p, double t) const;
  /// H splits as kinetic(p) + potential(x, t).
  double kinetic(double p) const {
    const double q = rescale_ * p + shift_;
    return 0.5 * q * q + offset_;
  }
  /// H_p, which depends on p only for these families.
  double velocity(double p) const { return rescale_ * (rescale_ * p + shift_); }
  double potential_at(double x, double t) const { return effective_.value(x, rescale_ * t); }
  bool time_dependent() const { return effective_.time_dependent(); }
  LagrangianValue lagrangian(double x, double v, double t) const;

  /// The momentum minimizing p -> H(x,p,t); independent of (x,t) for these families.
  double argmin_momentum() const;
  /// max |H_p| over |p| <= cap.
  double max_abs_hp(double cap) const;
  /// Velocity of the frame in which the potential is stationary (N/k for
  /// TravelingWave, 0 otherwise), in the model's own time.
  double frame_velocity() const;
  /// True when the potential does not depend on time in the co-moving frame.
  bool stationary_in_frame() const;
  /// The potential as seen in the co-moving frame, as a function of y only.
  const Potential& frame_potential() const { return base_; }

private:
  HamiltonianModel() = default;

  Family family_ = Family::Mechanical;
  Potential base_;
  Potential effective_;  // W(x,t) of the normal form
  double momentum_shift_ = 0.0;
  int wind_ = 1;
  double growth_constant_ = 1.0;
  double shift_ = 0.0;   // s
  double offset_ = 0.0;  // o
  int rescale_ = 1;
  double convexity_floor_ = 1e-8;
};

inline Jet evaluate_jet(const HamiltonianModel& model, double x, double p, double t) {
  return model.jet(x, p, t);
}

inline LagrangianValue legendre(const HamiltonianModel& model, double x, double v, double t) {
  return model.lagrangian(x, v, t);
}

struct SampleDensity {
  int nx = 512;
  int np = 64;
  int nt = 64;
};

/// Outcome of sampling the standing hypotheses. FAIL is a value, not an exception.
struct HypothesisReport {
  double min_hpp = 0.0;
  bool convexity_pass = false;
  double growth_band_low = 0.0;
  double growth_band_high = 0.0;
  double growth_min = 0.0;
  bool growth_pass = false;
  double periodicity_x_residual = 0.0;
  double periodicity_t_residual = 0.0;
  bool periodicity_pass = false;
  bool all_pass() const { return convexity_pass && growth_pass && periodicity_pass; }
};

/// Samples convexity, the growth inequality on the band K <= |p| <= 3K, and
/// the space/time periodicity of H on an (x, p, t) lattice.
HypothesisReport verify_hypotheses(const HamiltonianModel& model, SampleDensity density = {});

}  // namespace wkam
