#include "cotrap/fock.hpp"

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "cotrap/constants.hpp"
#include "cotrap/errors.hpp"

namespace cotrap::fock {

namespace {
constexpr Complex I{0.0, 1.0};

void check_dim(int N) {
  if (N < 2 || N > 4096) throw ParameterError("fock: dimension out of range");
}
}  // namespace

double TruncatedState::tail_mass() const {
  const int start = static_cast<int>(std::floor(0.8 * N));
  double s = 0.0;
  for (int n = start; n < N; ++n) s += std::norm(v[n]);
  return s;
}

ThermalState ThermalState::from_temperature(double T, double omega) {
  if (T <= 0.0) return {0.0};
  const double x = constants::hbar * omega / (constants::boltzmann * T);
  return {1.0 / std::expm1(x)};
}

TruncatedOperator identity(int N) {
  check_dim(N);
  return {N, Eigen::MatrixXcd::Identity(N, N)};
}

TruncatedOperator annihilation(int N) {
  check_dim(N);
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(N, N);
  for (int n = 1; n < N; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return {N, a};
}

TruncatedOperator creation(int N) {
  TruncatedOperator a = annihilation(N);
  a.m.adjointInPlace();
  return a;
}

TruncatedOperator number(int N) {
  check_dim(N);
  Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(N, N);
  for (int k = 0; k < N; ++k) n(k, k) = k;
  return {N, n};
}

TruncatedOperator matrix_displacement(Complex alpha, int N) {
  const Eigen::MatrixXcd a = annihilation(N).m;
  const Eigen::MatrixXcd gen = alpha * a.adjoint() - std::conj(alpha) * a;
  return {N, gen.exp()};
}

TruncatedOperator matrix_squeeze(Complex zeta, int N) {
  const Eigen::MatrixXcd a = annihilation(N).m;
  const Eigen::MatrixXcd a2 = a * a;
  const Eigen::MatrixXcd gen = 0.5 * (std::conj(zeta) * a2 - zeta * a2.adjoint());
  return {N, gen.exp()};
}

TruncatedOperator matrix_rotation(double chi, int N) {
  check_dim(N);
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(N, N);
  for (int k = 0; k < N; ++k) r(k, k) = std::polar(1.0, -chi * (k + 0.5));
  return {N, r};
}

TruncatedOperator operator*(const TruncatedOperator& a, const TruncatedOperator& b) {
  return {a.N, a.m * b.m};
}

TruncatedOperator matrix_propagator(const GaussianPropagator& U, int N) {
  TruncatedOperator out = matrix_displacement(U.alpha, N) *
                          matrix_squeeze(U.tau.zeta(), N) * matrix_rotation(U.chi, N);
  out.m *= std::polar(1.0, U.phi);
  return out;
}

TruncatedState vacuum(int N) { return number_state(0, N); }

TruncatedState number_state(int n, int N) {
  check_dim(N);
  if (n < 0 || n >= N) throw ParameterError("fock: number state outside truncation");
  TruncatedState s{N, Eigen::VectorXcd::Zero(N)};
  s.v[n] = 1.0;
  return s;
}

TruncatedState apply(const TruncatedOperator& op, const TruncatedState& s) {
  return {s.N, op.m * s.v};
}

Complex inner(const TruncatedState& a, const TruncatedState& b) { return a.v.dot(b.v); }

double fidelity(const TruncatedState& a, const TruncatedState& b) {
  return std::norm(inner(a, b));
}

namespace {

// a psi and a^dag psi on the truncated ladder.
void lower(const Eigen::VectorXcd& p, Eigen::VectorXcd& out) {
  const int N = static_cast<int>(p.size());
  for (int n = 0; n + 1 < N; ++n) out[n] = std::sqrt(double(n + 1)) * p[n + 1];
  out[N - 1] = 0.0;
}
void raise(const Eigen::VectorXcd& p, Eigen::VectorXcd& out) {
  const int N = static_cast<int>(p.size());
  out[0] = 0.0;
  for (int n = 1; n < N; ++n) out[n] = std::sqrt(double(n)) * p[n - 1];
}

}  // namespace

TruncatedState propagate_numeric(const TruncatedState& initial, const DriveFunction& drive,
                                 double omega, const NumericOptions& opt) {
  drive.validate();
  const int N = initial.N;
  Eigen::VectorXcd psi = initial.v;
  Eigen::VectorXcd t1(N), t2(N), x(N), xx(N);

  for (const auto& seg : drive.segments) {
    if (seg.t_end <= seg.t_start) continue;
    if (seg.f.is_zero() && seg.g.is_zero()) continue;
    auto noop = [](double, const Eigen::VectorXcd&, const Eigen::VectorXcd&) {};

    if (opt.model == PropagationModel::exact) {
      // H = f X + (g/2) X^2, X = e a + e* a^dag.
      auto rhs = [&](double t, const Eigen::VectorXcd& p, Eigen::VectorXcd& d) {
        const Complex e = std::polar(1.0, omega * t);
        const double f = seg.f(t), g = seg.g(t);
        lower(p, t1);
        raise(p, t2);
        x = e * t1 + std::conj(e) * t2;
        lower(x, t1);
        raise(x, t2);
        xx = e * t1 + std::conj(e) * t2;
        d = -I * (f * x + 0.5 * g * xx);
      };
      integrate_dopri5(rhs, psi, seg.t_start, seg.t_end, opt.step, noop);
    } else {
      const SegmentCoefficients co =
          SegmentCoefficients::build(seg, omega, opt.model, opt.rwa_cutoff);
      Eigen::VectorXcd a1(N), a2(N), c1(N), c2(N);
      auto rhs = [&](double t, const Eigen::VectorXcd& p, Eigen::VectorXcd& d) {
        const Complex lam = co.lambda_at(t), kap = co.kappa_at(t);
        const double nu = co.nu_at(t);
        lower(p, a1);
        lower(a1, a2);
        raise(p, c1);
        raise(c1, c2);
        d = -I * (lam * a1 + std::conj(lam) * c1 + 0.5 * (kap * a2 + std::conj(kap) * c2));
        for (int n = 0; n < N; ++n) d[n] += -I * nu * (n + 0.5) * p[n];
      };
      integrate_dopri5(rhs, psi, seg.t_start, seg.t_end, opt.step, noop);
    }
  }
  return {N, psi};
}

Complex thermal_overlap(const TruncatedOperator& op, const ThermalState& th, int N) {
  if (th.nbar < 0.0) throw ParameterError("thermal state: nbar must be >= 0");
  if (N > op.N) throw ParameterError("thermal_overlap: N exceeds operator dimension");
  const double q = th.nbar / (th.nbar + 1.0);
  Complex acc{0.0, 0.0};
  double norm = 0.0, w = 1.0;
  for (int n = 0; n < N; ++n) {
    acc += w * op.m(n, n);
    norm += w;
    w *= q;
    if (w == 0.0) break;
  }
  return acc / norm;
}

}  // namespace cotrap::fock
