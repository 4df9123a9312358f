#include "wkam/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "wkam/error.hpp"

namespace wkam {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double frac(double z) { return z - std::floor(z); }

}  // namespace

Family parse_family(std::string_view tag) {
  if (tag == "Mechanical") return Family::Mechanical;
  if (tag == "ShiftedKinetic") return Family::ShiftedKinetic;
  if (tag == "TravelingWave") return Family::TravelingWave;
  throw ConfigurationError("unknown Hamiltonian family '" + std::string(tag) + "'");
}

std::string_view to_string(Family family) {
  switch (family) {
    case Family::Mechanical: return "Mechanical";
    case Family::ShiftedKinetic: return "ShiftedKinetic";
    case Family::TravelingWave: return "TravelingWave";
  }
  return "?";
}

Potential::Potential(std::vector<PotentialTerm> terms) : terms_(std::move(terms)) {}

Potential::Derivatives Potential::eval(double x, double t) const {
  Derivatives d;
  for (const auto& term : terms_) {
    const double theta = kTwoPi * frac(term.freq_x * x + term.freq_t * t);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double kx = kTwoPi * term.freq_x;
    const double kt = kTwoPi * term.freq_t;
    const double wave = term.c_cos * c + term.c_sin * s;
    const double slope = -term.c_cos * s + term.c_sin * c;
    d.v += wave;
    d.v_x += kx * slope;
    d.v_xx -= kx * kx * wave;
    d.v_t += kt * slope;
    d.v_xt -= kx * kt * wave;
  }
  return d;
}

bool Potential::time_dependent() const {
  return std::any_of(terms_.begin(), terms_.end(), [](const PotentialTerm& t) {
    return t.freq_t != 0 && (t.c_cos != 0.0 || t.c_sin != 0.0);
  });
}

bool Potential::period_divides(int k) const {
  if (k <= 0) return false;
  return std::all_of(terms_.begin(), terms_.end(),
                     [k](const PotentialTerm& t) { return t.freq_x % k == 0; });
}

Potential benchmark_potential() {
  // -sin^2(y)(1 + cos(y)/2) = -1/2 - cos(y)/8 + cos(2y)/2 + cos(3y)/8, y = 2 pi x
  return Potential({{0, 0, -0.5, 0.0}, {1, 0, -0.125, 0.0}, {2, 0, 0.5, 0.0}, {3, 0, 0.125, 0.0}});
}

HamiltonianModel HamiltonianModel::mechanical(Potential V, double growth_constant) {
  if (V.time_dependent())
    throw ConfigurationError("Mechanical family requires a time-independent potential");
  HamiltonianModel m;
  m.family_ = Family::Mechanical;
  m.effective_ = V;
  m.base_ = std::move(V);
  m.growth_constant_ = growth_constant;
  return m;
}

HamiltonianModel HamiltonianModel::shifted_kinetic(Potential V, double momentum_shift,
                                                   double growth_constant) {
  HamiltonianModel m;
  m.family_ = Family::ShiftedKinetic;
  m.effective_ = V;
  m.base_ = std::move(V);
  m.momentum_shift_ = momentum_shift;
  m.shift_ = momentum_shift;
  m.growth_constant_ = growth_constant;
  return m;
}

HamiltonianModel HamiltonianModel::traveling_wave(Potential V, int wind, double growth_constant) {
  if (wind < 1) throw ConfigurationError("TravelingWave wind must be a positive integer");
  if (V.time_dependent())
    throw ConfigurationError("TravelingWave potential must depend on x only");
  if (!V.period_divides(wind))
    throw ConfigurationError("TravelingWave potential must be 1/k-periodic (all frequencies multiples of k)");
  HamiltonianModel m;
  m.family_ = Family::TravelingWave;
  // V(x + t/k): the mode f becomes (f, f/k) in (x, t), integer since k | f.
  std::vector<PotentialTerm> moving;
  moving.reserve(V.terms().size());
  for (const auto& term : V.terms())
    moving.push_back({term.freq_x, term.freq_x / wind, term.c_cos, term.c_sin});
  m.effective_ = Potential(std::move(moving));
  m.base_ = std::move(V);
  m.wind_ = wind;
  // p^2/2 - p/k = (p - 1/k)^2/2 - 1/(2k^2)
  m.shift_ = -1.0 / wind;
  m.offset_ = -0.5 / (static_cast<double>(wind) * wind);
  m.growth_constant_ = growth_constant;
  return m;
}

HamiltonianModel HamiltonianModel::rescaled(int N) const {
  if (N < 1) throw ConfigurationError("rescaling factor must be a positive integer");
  HamiltonianModel m = *this;
  m.rescale_ *= N;
  return m;
}

Jet HamiltonianModel::jet(double x, double p, double t) const {
  const double N = rescale_;
  const double q = N * p + shift_;
  const auto w = effective_.eval(x, N * t);
  Jet j;
  j.H = 0.5 * q * q + offset_ + w.v;
  j.H_p = N * q;
  j.H_pp = N * N;
  j.H_x = w.v_x;
  j.H_xx = w.v_xx;
  j.H_xp = 0.0;
  j.H_t = N * w.v_t;
  return j;
}

LagrangianValue HamiltonianModel::lagrangian(double x, double v, double t) const {
  const double N = rescale_;
  const double w = v / N;
  const double pot = effective_.value(x, N * t);
  // max_q (q w - (q+s)^2/2) attained at q = w - s
  return {0.5 * w * w - shift_ * w - offset_ - pot, (w - shift_) / N};
}

double HamiltonianModel::argmin_momentum() const { return -shift_ / rescale_; }

double HamiltonianModel::max_abs_hp(double cap) const {
  const double N = rescale_;
  return N * (N * cap + std::abs(shift_));
}

double HamiltonianModel::frame_velocity() const {
  return family_ == Family::TravelingWave ? static_cast<double>(rescale_) / wind_ : 0.0;
}

bool HamiltonianModel::stationary_in_frame() const { return !base_.time_dependent(); }

HypothesisReport verify_hypotheses(const HamiltonianModel& model, SampleDensity density) {
  if (!(model.growth_constant() > 0.0))
    throw PreconditionError("growth constant K must be positive");
  HypothesisReport r;
  const double K = model.growth_constant();
  r.growth_band_low = K;
  r.growth_band_high = 3.0 * K;

  // inf over (x,t) of H(x,0,t)
  double inf_h0 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < density.nx; ++i)
    for (int k = 0; k < density.nt; ++k) {
      const double x = static_cast<double>(i) / density.nx;
      const double t = static_cast<double>(k) / density.nt;
      inf_h0 = std::min(inf_h0, model.jet(x, 0.0, t).H);
    }

  r.min_hpp = std::numeric_limits<double>::infinity();
  r.growth_min = std::numeric_limits<double>::infinity();
  const int half = std::max(1, density.np / 2);
  for (int i = 0; i < density.nx; ++i) {
    const double x = static_cast<double>(i) / density.nx;
    for (int k = 0; k < density.nt; ++k) {
      const double t = static_cast<double>(k) / density.nt;
      for (int m = 0; m < density.np; ++m) {
        // half the samples on [K, 3K], half on [-3K, -K]
        const int idx = m % half;
        const double frac_band = half > 1 ? static_cast<double>(idx) / (half - 1) : 0.0;
        const double mag = K + 2.0 * K * frac_band;
        const double p = m < half ? mag : -mag;
        const Jet j = model.jet(x, p, t);
        r.min_hpp = std::min(r.min_hpp, j.H_pp);
        const double growth = (j.H_p * p - j.H + inf_h0) * K - std::abs(j.H_x);
        r.growth_min = std::min(r.growth_min, growth);
        const double hx = model.jet(x + 1.0, p, t).H;
        const double ht = model.jet(x, p, t + 1.0).H;
        const double scale = std::max(1.0, std::abs(j.H));
        r.periodicity_x_residual = std::max(r.periodicity_x_residual, std::abs(hx - j.H) / scale);
        r.periodicity_t_residual = std::max(r.periodicity_t_residual, std::abs(ht - j.H) / scale);
      }
    }
  }
  r.convexity_pass = r.min_hpp >= model.convexity_floor();
  r.growth_pass = r.growth_min >= 0.0;
  r.periodicity_pass = r.periodicity_x_residual <= 1e-12 && r.periodicity_t_residual <= 1e-12;
  return r;
}

}  // namespace wkam
