#include "cotrap/gaussian.hpp"

#include <cmath>
#include <sstream>

#include "cotrap/errors.hpp"

namespace cotrap {

namespace {

constexpr Complex I{0.0, 1.0};

using StateVec = Eigen::Matrix<double, 8, 1>;  // Re a, Im a, Re t, Im t, phi, chi, chi_rot, chi_sq

Complex series_at(const std::vector<SpectralTerm>& s, double t) {
  Complex acc{0.0, 0.0};
  for (const auto& term : s) acc += term.c * std::polar(1.0, term.w * t);
  return acc;
}

// Appends waveform(t) * e^{i shift t} as spectral terms.
void append_modulated(std::vector<SpectralTerm>& out, const Waveform& w, double shift) {
  if (w.offset != 0.0) out.push_back({Complex(w.offset, 0.0), shift});
  for (const auto& tone : w.tones) {
    if (tone.amplitude == 0.0) continue;
    // A sin(nu t - p) = (A / 2i) (e^{i(nu t - p)} - e^{-i(nu t - p)})
    const Complex half = tone.amplitude / (2.0 * I);
    out.push_back({half * std::polar(1.0, -tone.phase), shift + tone.frequency});
    out.push_back({-half * std::polar(1.0, tone.phase), shift - tone.frequency});
  }
}

void drop_fast(std::vector<SpectralTerm>& s, double cutoff) {
  std::vector<SpectralTerm> kept;
  for (const auto& term : s)
    if (std::abs(term.w) <= cutoff) kept.push_back(term);
  s.swap(kept);
}

// Merge terms with identical frequency (keeps evaluation cheap, deterministic order).
void merge_equal(std::vector<SpectralTerm>& s) {
  std::vector<SpectralTerm> out;
  for (const auto& term : s) {
    bool merged = false;
    for (auto& o : out)
      if (o.w == term.w) {
        o.c += term.c;
        merged = true;
        break;
      }
    if (!merged) out.push_back(term);
  }
  std::vector<SpectralTerm> nz;
  for (const auto& o : out)
    if (o.c != Complex(0.0, 0.0)) nz.push_back(o);
  s.swap(nz);
}

GaussianPropagator unpack(const StateVec& y, double t, double omega) {
  GaussianPropagator g;
  g.alpha = {y[0], y[1]};
  g.tau = SqueezeParam(Complex(y[2], y[3]));
  g.phi = y[4];
  g.chi = y[5];
  g.t = t;
  g.omega = omega;
  return g;
}

}  // namespace

// ---------------------------------------------------------------- SqueezeParam

SqueezeParam::SqueezeParam(Complex tau) : tau_(tau) {
  if (!(std::abs(tau) < 1.0) || !std::isfinite(tau.real()) || !std::isfinite(tau.imag()))
    throw ParameterError("squeeze parameter must satisfy |tau| < 1");
}

SqueezeParam SqueezeParam::from_zeta(Complex zeta) {
  const double r = std::abs(zeta);
  if (r == 0.0) return SqueezeParam();
  return SqueezeParam(std::tanh(r) * zeta / r);
}

Complex SqueezeParam::zeta() const {
  const double m = std::abs(tau_);
  if (m == 0.0) return {0.0, 0.0};
  return std::atanh(m) * tau_ / m;
}

double SqueezeParam::r() const { return std::atanh(std::abs(tau_)); }

double SqueezeParam::cosh_r() const { return 1.0 / std::sqrt(1.0 - std::norm(tau_)); }

Complex SqueezeParam::e_itheta_sinh_r() const { return tau_ * cosh_r(); }

// ---------------------------------------------------------------- algebra

DisplaceComposition displace_compose(Complex a, Complex b) {
  return {a + b, std::imag(a * std::conj(b))};
}

SqueezeComposition squeeze_compose(Complex tau1, Complex tau2) {
  if (!(std::abs(tau1) < 1.0) || !(std::abs(tau2) < 1.0))
    throw ParameterError("squeeze_compose: |tau| must be < 1");
  const Complex w = 1.0 + tau1 * std::conj(tau2);
  const Complex tau3 = (tau1 + tau2) / (1.0 + std::conj(tau1) * tau2);
  if (!(std::abs(tau3) < 1.0))
    throw ParameterError("squeeze_compose: composed |tau| reached the unit circle");
  // ln(w / w*) / 2 = i arg(w)
  return {tau3, Complex(0.0, std::arg(w))};
}

Complex commute_disp_squeeze(Complex alpha, Complex zeta) {
  const SqueezeParam s = SqueezeParam::from_zeta(zeta);
  return alpha * s.cosh_r() + std::conj(alpha) * s.e_itheta_sinh_r();
}

Complex commute_squeeze_disp(Complex gamma, Complex zeta) {
  const SqueezeParam s = SqueezeParam::from_zeta(zeta);
  return gamma * s.cosh_r() - std::conj(gamma) * s.e_itheta_sinh_r();
}

Complex amplified_displacement(double G, Complex alpha_sdf) {
  if (!(G > 0.0)) throw ParameterError("amplified_displacement: G must be positive");
  const double x = std::log(G);
  if (std::abs(x) < 1e-8) return alpha_sdf * (1.0 + 0.5 * x + x * x / 6.0);
  return alpha_sdf * ((G - 1.0) / x);
}

GaussianPropagator multiply(const GaussianPropagator& A, const GaussianPropagator& B) {
  const Complex rot = std::polar(1.0, -A.chi);
  const Complex a2 = B.alpha * rot;
  const Complex t2 = B.tau.tau() * rot * rot;
  // S(z1) D(a2) = D(g) S(z1)
  const Complex g = a2 * A.tau.cosh_r() - std::conj(a2) * A.tau.e_itheta_sinh_r();
  const DisplaceComposition dc = displace_compose(A.alpha, g);
  const SqueezeComposition sc = squeeze_compose(A.tau.tau(), t2);

  GaussianPropagator out;
  out.alpha = dc.result;
  out.tau = SqueezeParam(sc.tau3);
  out.phi = A.phi + B.phi + dc.phase;
  out.chi = A.chi + B.chi - sc.sigma3_coeff.imag();
  out.t = A.t;
  out.omega = A.omega;
  return out;
}

GaussianPropagator inverse(const GaussianPropagator& A) {
  const Complex y = -A.alpha * A.tau.cosh_r() - std::conj(A.alpha) * A.tau.e_itheta_sinh_r();
  const Complex rot = std::polar(1.0, A.chi);
  GaussianPropagator out;
  out.alpha = y * rot;
  out.tau = SqueezeParam(-A.tau.tau() * rot * rot);
  out.phi = -A.phi;
  out.chi = -A.chi;
  out.t = A.t;
  out.omega = A.omega;
  return out;
}

GaussianPropagator displace(const GaussianPropagator& U, Complex beta) {
  GaussianPropagator out = U;
  const DisplaceComposition dc = displace_compose(beta, U.alpha);
  out.alpha = dc.result;
  out.phi += dc.phase;
  return out;
}

Bogoliubov bogoliubov(const GaussianPropagator& U) {
  const double c = U.tau.cosh_r();
  Bogoliubov b;
  b.P = c * std::polar(1.0, -U.chi);
  b.Q = -U.tau.tau() * c * std::polar(1.0, U.chi);
  return b;
}

// ---------------------------------------------------------------- drives

double Waveform::operator()(double t) const {
  double v = offset;
  for (const auto& tone : tones) v += tone.amplitude * std::sin(tone.frequency * t - tone.phase);
  return v;
}

bool Waveform::is_zero() const {
  if (offset != 0.0) return false;
  for (const auto& tone : tones)
    if (tone.amplitude != 0.0) return false;
  return true;
}

Waveform Waveform::negated() const {
  Waveform w = *this;
  w.offset = -w.offset;
  for (auto& tone : w.tones) tone.amplitude = -tone.amplitude;
  return w;
}

double DriveFunction::t_start() const { return segments.empty() ? 0.0 : segments.front().t_start; }
double DriveFunction::t_end() const { return segments.empty() ? 0.0 : segments.back().t_end; }

namespace {
const DriveSegment* find_segment(const DriveFunction& d, double t) {
  for (const auto& s : d.segments)
    if (t >= s.t_start && t < s.t_end) return &s;
  if (!d.segments.empty() && t == d.segments.back().t_end) return &d.segments.back();
  return nullptr;
}
}  // namespace

double DriveFunction::f(double t) const {
  const DriveSegment* s = find_segment(*this, t);
  return s ? s->f(t) : 0.0;
}

double DriveFunction::g(double t) const {
  const DriveSegment* s = find_segment(*this, t);
  return s ? s->g(t) : 0.0;
}

void DriveFunction::validate() const {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (!(s.t_end >= s.t_start) || !std::isfinite(s.t_start) || !std::isfinite(s.t_end))
      throw ParameterError("drive segment has an invalid interval");
    if (i > 0 && segments[i - 1].t_end != s.t_start)
      throw ParameterError("drive segments must be contiguous");
    auto check = [](const Waveform& w) {
      if (!std::isfinite(w.offset)) throw ParameterError("drive waveform not finite");
      for (const auto& tone : w.tones)
        if (!std::isfinite(tone.amplitude) || !std::isfinite(tone.frequency) ||
            !std::isfinite(tone.phase))
          throw ParameterError("drive waveform not finite");
    };
    check(s.f);
    check(s.g);
  }
}

SegmentCoefficients SegmentCoefficients::build(const DriveSegment& seg, double omega,
                                               PropagationModel model, double rwa_cutoff) {
  SegmentCoefficients c;
  append_modulated(c.lambda, seg.f, omega);
  append_modulated(c.kappa, seg.g, 2.0 * omega);
  append_modulated(c.nu, seg.g, 0.0);
  if (model == PropagationModel::rotating_wave) {
    const double cut = rwa_cutoff * std::abs(omega);
    drop_fast(c.lambda, cut);
    drop_fast(c.kappa, cut);
    drop_fast(c.nu, cut);
  }
  merge_equal(c.lambda);
  merge_equal(c.kappa);
  merge_equal(c.nu);
  return c;
}

Complex SegmentCoefficients::lambda_at(double t) const { return series_at(lambda, t); }
Complex SegmentCoefficients::kappa_at(double t) const { return series_at(kappa, t); }
double SegmentCoefficients::nu_at(double t) const { return series_at(nu, t).real(); }

// ---------------------------------------------------------------- propagation

GaussianPropagator propagate(const GaussianPropagator& state, const DriveFunction& drive,
                             double dt_max) {
  PropagateOptions opt;
  opt.step.dt_max = dt_max;
  return propagate(state, drive, opt);
}

GaussianPropagator propagate(const GaussianPropagator& state, const DriveFunction& drive,
                             const PropagateOptions& opt) {
  drive.validate();
  const double omega = state.omega;
  StateVec y;
  y << state.alpha.real(), state.alpha.imag(), state.tau.tau().real(), state.tau.tau().imag(),
      state.phi, state.chi, 0.0, 0.0;
  if (opt.ledger) {
    y[6] = opt.ledger->number_rotation;
    y[7] = opt.ledger->squeeze_merge;
  }
  double t = state.t;

  for (const auto& seg : drive.segments) {
    if (seg.t_end <= t) continue;
    const double t0 = std::max(t, seg.t_start);
    const double t1 = seg.t_end;
    const SegmentCoefficients co = SegmentCoefficients::build(seg, omega, opt.model, opt.rwa_cutoff);

    auto rhs = [&co](double tt, const StateVec& s, StateVec& d) {
      const Complex lam = co.lambda_at(tt);
      const Complex kap = co.kappa_at(tt);
      const double nu = co.nu_at(tt);
      const Complex a(s[0], s[1]);
      const Complex tau(s[2], s[3]);
      const Complex da = -I * (std::conj(lam) + nu * a + std::conj(kap) * std::conj(a));
      const Complex dt = I * (std::conj(kap) - 2.0 * nu * tau + kap * tau * tau);
      const double dchi_sq = -std::real(kap * tau);
      d[0] = da.real();
      d[1] = da.imag();
      d[2] = dt.real();
      d[3] = dt.imag();
      d[4] = -std::real(lam * a);
      d[5] = nu + dchi_sq;
      d[6] = nu;
      d[7] = dchi_sq;
    };
    auto obs = [&](double tt, const StateVec& s, const StateVec& d) {
      const double m = std::hypot(s[2], s[3]);
      if (!(m <= kTauLimit)) {
        std::ostringstream os;
        os << "squeeze blow-up: |tau| = " << m << " exceeds 1 - 1e-9 at t = " << tt << " s";
        throw PhysicsError(os.str(), tt);
      }
      if (opt.observer) {
        PropagationSample smp;
        smp.state = unpack(s, tt, omega);
        smp.dalpha = {d[0], d[1]};
        smp.dtau = {d[2], d[3]};
        smp.dphi = d[4];
        smp.dchi = d[5];
        smp.lambda = co.lambda_at(tt);
        smp.kappa = co.kappa_at(tt);
        smp.nu = co.nu_at(tt);
        opt.observer(smp);
      }
    };

    if (co.is_zero()) {
      StateVec d = StateVec::Zero();
      obs(t0, y, d);
      obs(t1, y, d);
    } else {
      try {
        integrate_dopri5(rhs, y, t0, t1, opt.step, obs);
      } catch (const IntegrationError& e) {
        throw PhysicsError(std::string("propagation failed: ") + e.what(), e.time());
      }
    }
    t = t1;
  }
  if (opt.ledger) {
    opt.ledger->geometric = y[4];
    opt.ledger->number_rotation = y[6];
    opt.ledger->squeeze_merge = y[7];
  }
  return unpack(y, std::max(t, state.t), omega);
}

}  // namespace cotrap
