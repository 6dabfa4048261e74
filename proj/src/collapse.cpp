#include "cotrap/collapse.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cotrap/constants.hpp"
#include "cotrap/errors.hpp"
#include "cotrap/parallel.hpp"

namespace cotrap {

double CollapseModel::sigma_p() const { return constants::hbar / sigma; }

KickStatistics kick_statistics(const CollapseModel& model, const ModeStructure& modes,
                               double flake_mass, double flake_radius, KickFrame frame,
                               double separation_factor) {
  if (!(model.tau_e > 0.0)) throw ParameterError("collapse: tau_e must be positive");
  if (!(model.sigma > 0.0)) throw ParameterError("collapse: sigma must be positive");
  if (!(flake_mass > 0.0)) throw ParameterError("collapse: flake mass must be positive");
  KickStatistics k;
  const double ratio = flake_mass / constants::electron_mass;
  k.gamma = ratio * ratio / model.tau_e;
  k.sigma_alpha = std::isinf(model.sigma) ? 0.0 : modes.x0_i * modes.b2i / model.sigma;
  k.frame = frame;
  if (flake_radius > 0.0 && !(flake_radius * separation_factor <= model.sigma)) {
    std::ostringstream os;
    os << "flake radius " << flake_radius << " m is not << sigma = " << model.sigma
       << " m; the (M/m_e)^2 rate scaling assumes a point-like object";
    k.warnings.push_back(os.str());
  }
  return k;
}

Complex sample_jump(const KickStatistics& stats, std::mt19937_64& rng) {
  if (stats.sigma_alpha == 0.0) return {0.0, 0.0};
  std::normal_distribution<double> n(0.0, 1.0);
  return {0.0, stats.sigma_alpha * n(rng)};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream) {
  return splitmix64(splitmix64(splitmix64(master) ^ index) ^ (stream * 0xd1b54a32d192ed03ULL));
}

// ---------------------------------------------------------------- reference

namespace {

struct Node {
  double t;
  Complex a, da, P, dP, Q, dQ;
};

std::vector<Node> sample_branch(const ProtocolSchedule& s, Spin spin, const StepControl& step,
                                GaussianPropagator& final_state) {
  std::vector<Node> nodes;
  GaussianPropagator u;
  u.omega = s.omega_i;
  PropagateOptions opt;
  opt.step = step;
  opt.model = s.inphase_model;
  const Complex I{0.0, 1.0};
  opt.observer = [&](const PropagationSample& p) {
    const Bogoliubov b = bogoliubov(p.state);
    Node n;
    n.t = p.state.t;
    n.a = p.state.alpha;
    n.da = p.dalpha;
    n.P = b.P;
    n.Q = b.Q;
    n.dP = -I * (p.nu * b.P + std::conj(p.kappa) * std::conj(b.Q));
    n.dQ = -I * (p.nu * b.Q + std::conj(p.kappa) * std::conj(b.P));
    nodes.push_back(n);
  };
  final_state = propagate(u, s.drive(Mode::in_phase, spin), opt);
  return nodes;
}

inline Complex hermite(double s, double h, Complex y0, Complex d0, Complex y1, Complex d1) {
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
}

}  // namespace

ReferencePropagation::ReferencePropagation(const ProtocolSchedule& schedule,
                                           const StepControl& step)
    : schedule_(schedule) {
  const auto& gu = schedule.drive(Mode::in_phase, Spin::up);
  const auto& gd = schedule.drive(Mode::in_phase, Spin::down);
  if (gu.segments.size() != gd.segments.size())
    throw ParameterError("reference: branch schedules differ in structure");
  for (std::size_t i = 0; i < gu.segments.size(); ++i)
    if (!(gu.segments[i].g == gd.segments[i].g) || gu.segments[i].t_start != gd.segments[i].t_start)
      throw ParameterError("reference: quadratic drive must be shared by both spins");

  const std::vector<Node> up = sample_branch(schedule, Spin::up, step, final_[0]);
  std::vector<Node> down = sample_branch(schedule, Spin::down, step, final_[1]);

  // The down branch is only needed for alpha; re-sample it on the up grid
  // when the step sequences differ (they coincide for antisymmetric drives).
  bool same = up.size() == down.size();
  for (std::size_t i = 0; same && i < up.size(); ++i) same = up[i].t == down[i].t;
  t_.reserve(up.size());
  v_.reserve(up.size());
  dv_.reserve(up.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < up.size(); ++i) {
    Complex ad, dad;
    if (same) {
      ad = down[i].a;
      dad = down[i].da;
    } else {
      const double t = up[i].t;
      while (k + 2 < down.size() && down[k + 1].t < t) ++k;
      const Node& n0 = down[k];
      const Node& n1 = down[std::min(k + 1, down.size() - 1)];
      const double h = n1.t - n0.t;
      const double s = h > 0 ? std::clamp((t - n0.t) / h, 0.0, 1.0) : 0.0;
      ad = hermite(s, h, n0.a, n0.da, n1.a, n1.da);
      dad = (1 - s) * n0.da + s * n1.da;
    }
    t_.push_back(up[i].t);
    v_.push_back({up[i].a, ad, up[i].P, up[i].Q});
    dv_.push_back({up[i].da, dad, up[i].dP, up[i].dQ});
  }
  antisymmetric_ = true;
  for (std::size_t i = 0; antisymmetric_ && i < v_.size(); ++i)
    antisymmetric_ = v_[i].alpha_down == -v_[i].alpha_up && dv_[i].alpha_down == -dv_[i].alpha_up;
}

ReferencePropagation::Point ReferencePropagation::at(double t, std::size_t& cursor) const {
  const std::size_t n = t_.size();
  if (n == 1) return v_[0];
  if (cursor >= n - 1 || t_[cursor] > t) cursor = 0;
  while (cursor + 2 < n && (t_[cursor + 1] < t || t_[cursor + 1] == t_[cursor])) ++cursor;
  const std::size_t i = cursor;
  const double h = t_[i + 1] - t_[i];
  if (!(h > 0.0)) return v_[i + 1];
  const double s = std::clamp((t - t_[i]) / h, 0.0, 1.0);
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = (s3 - 2 * s2 + s) * h;
  const double h01 = -2 * s3 + 3 * s2, h11 = (s3 - s2) * h;
  const Point& a = v_[i];
  const Point& b = v_[i + 1];
  const Point& da = dv_[i];
  const Point& db = dv_[i + 1];
  Point p;
  p.alpha_up = h00 * a.alpha_up + h10 * da.alpha_up + h01 * b.alpha_up + h11 * db.alpha_up;
  p.alpha_down = antisymmetric_
                     ? -p.alpha_up
                     : h00 * a.alpha_down + h10 * da.alpha_down + h01 * b.alpha_down + h11 * db.alpha_down;
  p.P = h00 * a.P + h10 * da.P + h01 * b.P + h11 * db.P;
  p.Q = h00 * a.Q + h10 * da.Q + h01 * b.Q + h11 * db.Q;
  return p;
}

// ---------------------------------------------------------------- trajectories

namespace {

struct KickFrameState {
  Complex c{0.0, 0.0};
  double psi_up = 0.0, psi_down = 0.0;
};

}  // namespace

TrajectoryRecord simulate_trajectory(const ProtocolSchedule& schedule,
                                     const KickStatistics& stats, std::uint64_t seed,
                                     const TrajectoryOptions& opt) {
  const ReferencePropagation ref(schedule);
  return simulate_trajectory(ref, stats, seed, opt);
}

TrajectoryRecord simulate_trajectory(const ReferencePropagation& ref, const KickStatistics& stats,
                                     std::uint64_t seed, const TrajectoryOptions& opt) {
  if (opt.injected_times.size() != opt.injected_amplitudes.size())
    throw ParameterError("simulate_trajectory: injected jump lists differ in length");
  if (opt.sampling == JumpSampling::bernoulli && !(opt.bernoulli_dt > 0.0))
    throw ParameterError("simulate_trajectory: bernoulli sampling needs dt > 0");

  TrajectoryRecord rec;
  rec.seed = seed;
  const ProtocolSchedule& s = ref.schedule();
  const double omega = s.omega_i;
  const bool lab = stats.frame == KickFrame::lab;
  KickFrameState st;
  std::size_t cursor = 0;

  auto kick = [&](double t, Complex beta_sampled) {
    ++rec.jump_count;
    if (opt.record_jumps) {
      rec.jump_times.push_back(t);
      rec.jump_amplitudes.push_back(beta_sampled);
    }
    const Complex beta = lab ? beta_sampled * std::polar(1.0, omega * t) : beta_sampled;
    const ReferencePropagation::Point p = ref.at(t, cursor);
    const Complex y = std::conj(p.P) * beta - p.Q * std::conj(beta);
    const double common = std::imag(y * std::conj(st.c));
    st.psi_up += 2.0 * std::imag(beta * std::conj(p.alpha_up)) + common;
    st.psi_down += 2.0 * std::imag(beta * std::conj(p.alpha_down)) + common;
    st.c += y;
  };

  // Injected jumps, consumed in time order alongside sampled ones.
  std::vector<std::size_t> order(opt.injected_times.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return opt.injected_times[a] < opt.injected_times[b];
  });
  std::size_t next_inj = 0;
  auto flush_injected = [&](double upto, bool inclusive) {
    while (next_inj < order.size()) {
      const double ti = opt.injected_times[order[next_inj]];
      if (ti < upto || (inclusive && ti <= upto)) {
        kick(ti, opt.injected_amplitudes[order[next_inj]]);
        ++next_inj;
      } else {
        break;
      }
    }
  };

  const auto b = s.boundaries();
  const double seg_start[3] = {b[0], b[2], b[3]};
  const double seg_end[3] = {b[2], b[3], b[5]};
  const bool active = stats.gamma > 0.0;
  for (int k = 0; k < 3; ++k) {
    const double t0 = seg_start[k], t1 = seg_end[k];
    if (active && t1 > t0) {
      std::mt19937_64 eng(derive_seed(seed, 0, static_cast<std::uint64_t>(k + 1)));
      std::normal_distribution<double> normal(0.0, 1.0);
      auto amplitude = [&] { return Complex(0.0, stats.sigma_alpha * normal(eng)); };
      if (opt.sampling == JumpSampling::exponential) {
        std::exponential_distribution<double> wait(stats.gamma);
        for (double t = t0 + wait(eng); t < t1; t += wait(eng)) {
          flush_injected(t, false);
          kick(t, amplitude());
        }
      } else {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double pj = stats.gamma * opt.bernoulli_dt;
        const auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / opt.bernoulli_dt));
        for (std::size_t j = 0; j < steps; ++j) {
          const double t = t0 + j * opt.bernoulli_dt;
          if (t >= t1) break;
          if (u(eng) < pj) {
            flush_injected(t, false);
            kick(t, amplitude());
          }
        }
      }
    }
    flush_injected(t1, k == 2);
  }

  GaussianPropagator vu, vd;
  vu.alpha = vd.alpha = st.c;
  vu.phi = st.psi_up;
  vd.phi = st.psi_down;
  rec.final_up = multiply(ref.final_branch(Spin::up), vu);
  rec.final_down = multiply(ref.final_branch(Spin::down), vd);
  rec.phase_difference = rec.final_up.phi - rec.final_down.phi;
  return rec;
}

std::vector<TrajectoryRecord> run_ensemble(const ReferencePropagation& ref,
                                           const KickStatistics& stats, std::uint64_t master_seed,
                                           std::size_t n, unsigned workers,
                                           const TrajectoryOptions& opt) {
  std::vector<TrajectoryRecord> out(n);
  parallel_for(
      n, workers,
      [&](std::size_t i) { out[i] = simulate_trajectory(ref, stats, derive_seed(master_seed, i), opt); },
      4);
  return out;
}

// ---------------------------------------------------------------- statistics

VisibilityResult visibility_from_phases(const std::vector<double>& input, int bootstrap) {
  // Sorted copy: sums and bootstrap draws become independent of record order.
  std::vector<double> phases(input);
  std::sort(phases.begin(), phases.end());
  VisibilityResult r;
  r.n = phases.size();
  if (phases.empty()) return r;
  std::vector<double> c(phases.size()), s(phases.size());
  double sc = 0.0, ss = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    c[i] = std::cos(phases[i]);
    s[i] = std::sin(phases[i]);
    sc += c[i];
    ss += s[i];
    mean += phases[i];
  }
  const double n = static_cast<double>(phases.size());
  r.V = std::hypot(sc, ss) / n;
  r.mean_phase = std::atan2(ss, sc);
  mean /= n;
  double var = 0.0;
  for (double p : phases) var += (p - mean) * (p - mean);
  r.phase_std = phases.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;

  if (bootstrap > 1 && phases.size() > 1) {
    std::mt19937_64 eng(derive_seed(0x7669736962ULL, phases.size()));
    std::uniform_int_distribution<std::size_t> pick(0, phases.size() - 1);
    double m1 = 0.0, m2 = 0.0;
    for (int b = 0; b < bootstrap; ++b) {
      double bc = 0.0, bs = 0.0;
      for (std::size_t i = 0; i < phases.size(); ++i) {
        const std::size_t j = pick(eng);
        bc += c[j];
        bs += s[j];
      }
      const double v = std::hypot(bc, bs) / n;
      m1 += v;
      m2 += v * v;
    }
    m1 /= bootstrap;
    r.V_err = std::sqrt(std::max(0.0, m2 / bootstrap - m1 * m1));
  }
  return r;
}

VisibilityResult ensemble_visibility(const std::vector<TrajectoryRecord>& records, int bootstrap) {
  std::vector<double> ph;
  ph.reserve(records.size());
  for (const auto& r : records) ph.push_back(r.phase_difference);
  return visibility_from_phases(ph, bootstrap);
}

DecayPrediction analytic_decay(const KickStatistics& stats, Complex alpha_f, double t) {
  if (t < 0.0) throw ParameterError("analytic_decay: t must be >= 0");
  DecayPrediction d;
  // One kick i n s at branch amplitudes +-alpha_f shifts the branch phase
  // difference by 4 n s Im(i e^{i w t} alpha_f*): rms 2 sqrt(2) s |alpha_f| cos(.)
  // for lab-frame kicks (averaging to 2 s |alpha_f|), 2 sqrt(2) s |Re alpha_f|
  // for interaction-frame kicks.
  const double s = stats.sigma_alpha;
  d.sigma0 = stats.frame == KickFrame::lab ? 2.0 * s * std::abs(alpha_f)
                                           : 2.0 * std::sqrt(2.0) * s * std::abs(alpha_f.real());
  d.Gamma = d.sigma0 * d.sigma0 * stats.gamma;
  d.V = std::exp(-d.Gamma * t);
  d.sigma_phi = std::sqrt(2.0 * d.Gamma * t);
  d.sigma0_literal = std::abs(alpha_f) * s;
  d.Gamma_literal = d.sigma0_literal * d.sigma0_literal * stats.gamma;
  return d;
}

}  // namespace cotrap
