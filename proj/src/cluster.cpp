#include "spindyn/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

#include "spindyn/errors.hpp"
#include "spindyn/rng.hpp"

namespace spindyn {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;

double sz_of(int basis, int spin) { return (basis >> spin) & 1 ? -0.5 : 0.5; }

// one (row, col, value) entry of a sparse single-spin observable
struct ObsEntry {
  int row, col;
  cplx val;
};

std::vector<ObsEntry> spin_observable(int dim, int spin, char axis) {
  std::vector<ObsEntry> obs;
  obs.reserve(dim);
  const int mask = 1 << spin;
  for (int b = 0; b < dim; ++b) {
    switch (axis) {
      case 'z':
        obs.push_back({b, b, sz_of(b, spin)});
        break;
      case 'x':
        obs.push_back({b ^ mask, b, 0.5});
        break;
      case 'y':
        // <down|Sy|up> = i/2 with bit 0 = up
        obs.push_back({b ^ mask, b, (b & mask) ? cplx(0.0, -0.5) : cplx(0.0, 0.5)});
        break;
      default:
        throw std::invalid_argument("spin_observable: bad axis");
    }
  }
  return obs;
}

// 4/dim * Re Tr[U^dag A U A] for a sparse observable A
double infinite_temp_corr(const MatrixXcd& u, const std::vector<ObsEntry>& a) {
  const int dim = static_cast<int>(u.rows());
  cplx sum = 0.0;
  for (const auto& e1 : a) {
    for (const auto& e2 : a) {
      sum += std::conj(u(e1.row, e2.col)) * e1.val * u(e1.col, e2.row) * e2.val;
    }
  }
  return 4.0 / dim * sum.real();
}

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// global rotation exp(-i angle sum_i S_i^axis)
MatrixXcd global_rotation(int n_spins, char axis, double angle) {
  Eigen::Matrix2cd r2;
  const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  if (axis == 'x') {
    r2 << cplx(c, 0), cplx(0, -s), cplx(0, -s), cplx(c, 0);
  } else if (axis == 'y') {
    r2 << cplx(c, 0), cplx(-s, 0), cplx(s, 0), cplx(c, 0);
  } else {
    throw std::invalid_argument("global_rotation: bad axis");
  }
  MatrixXcd r = r2;
  for (int i = 1; i < n_spins; ++i) r = kron(r, r2);
  return r;
}

// static Hamiltonian: secular dipolar couplings plus optional drive about +y
MatrixXcd static_hamiltonian(const Cluster& c) {
  const int n = c.n_spins;
  const int dim = 1 << n;
  MatrixXcd h = MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double jij = c.couplings.couplings.at(pair_index(i, j, n));
      for (int b = 0; b < dim; ++b) {
        h(b, b) += jij * sz_of(b, i) * sz_of(b, j);
        if (c.flip_flop) {
          const bool bi = (b >> i) & 1, bj = (b >> j) & 1;
          if (bi != bj) {
            const int b2 = b ^ (1 << i) ^ (1 << j);
            h(b2, b) += -jij / 4.0;
          }
        }
      }
    }
  }
  if (c.drive != 0.0) {
    for (int i = 0; i < n; ++i) {
      const int mask = 1 << i;
      for (int b = 0; b < dim; ++b) {
        if (!(b & mask)) {
          h(b ^ mask, b) += cplx(0.0, 0.5 * c.drive);
          h(b, b ^ mask) += cplx(0.0, -0.5 * c.drive);
        }
      }
    }
  }
  return h;
}

// U <- exp(-i H dt) U with H = h_static + diag(noise); 2x2 handled in closed
// form, larger dimensions via Hermitian eigendecomposition.
class Evolver {
 public:
  explicit Evolver(const Cluster& c)
      : cluster_(c),
        dim_(1 << c.n_spins),
        h_static_(static_hamiltonian(c)),
        u_(MatrixXcd::Identity(dim_, dim_)) {
    for (int i = 0; i < c.n_spins; ++i) {
      sz_diag_.emplace_back(dim_);
      for (int b = 0; b < dim_; ++b) sz_diag_.back()[b] = sz_of(b, i);
    }
  }

  void reset() { u_.setIdentity(); }

  const MatrixXcd& unitary() const { return u_; }

  bool has_noise() const {
    return !cluster_.onsite.empty() && cluster_.onsite.front().dt > 0.0;
  }

  double noise_duration() const {
    return has_noise() ? cluster_.onsite.front().duration()
                       : std::numeric_limits<double>::infinity();
  }

  // advance through absolute times [t0, t1]
  void evolve(double t0, double t1) {
    if (t1 <= t0) return;
    if (!has_noise()) {
      step(t0, t1 - t0);
      return;
    }
    const double dt = cluster_.onsite.front().dt;
    if (t1 > noise_duration() * (1.0 + 1e-9)) {
      throw std::out_of_range("cluster propagation beyond trajectory duration");
    }
    double t = t0;
    while (t < t1 - 1e-12 * std::max(1.0, t1)) {
      const auto k = static_cast<std::size_t>(std::floor(t / dt + 1e-9));
      const double seg_end = std::min((static_cast<double>(k) + 1.0) * dt, t1);
      step_with_noise(k, seg_end - t);
      t = seg_end;
    }
  }

  void apply_pulse(char axis, double angle) {
    u_ = global_rotation(cluster_.n_spins, axis, angle) * u_;
  }

 private:
  void step_with_noise(std::size_t sample, double dt_step) {
    if (dt_step <= 0.0) return;
    scratch_ = h_static_;
    for (int i = 0; i < cluster_.n_spins; ++i) {
      const auto& s = cluster_.onsite[i].samples;
      const double d = s[std::min(sample, s.size() - 1)];
      scratch_.diagonal() += d * sz_diag_[i];
    }
    advance(scratch_, dt_step);
  }

  void step(double, double dt_step) {
    if (dt_step <= 0.0) return;
    advance(h_static_, dt_step);
  }

  void advance(const MatrixXcd& h, double dt_step) {
    if (dim_ == 2) {
      // H = a0 I + h.sigma; exp(-iHdt) in closed form
      const double a0 = 0.5 * (h(0, 0).real() + h(1, 1).real());
      const double hz = 0.5 * (h(0, 0).real() - h(1, 1).real());
      const double hx = h(0, 1).real();
      const double hy = -h(0, 1).imag();
      const double norm = std::sqrt(hx * hx + hy * hy + hz * hz);
      const double th = norm * dt_step;
      const double c = std::cos(th);
      const double s = norm > 0.0 ? std::sin(th) / norm : 0.0;
      const cplx phase = std::polar(1.0, -a0 * dt_step);
      Eigen::Matrix2cd e;
      e(0, 0) = phase * cplx(c, -s * hz);
      e(1, 1) = phase * cplx(c, s * hz);
      e(0, 1) = phase * (cplx(0.0, -s) * cplx(hx, -hy));
      e(1, 0) = phase * (cplx(0.0, -s) * cplx(hx, hy));
      u_ = e * u_;
      return;
    }
    es_.compute(h);
    const VectorXd& ev = es_.eigenvalues();
    Eigen::VectorXcd ph(dim_);
    for (int i = 0; i < dim_; ++i) ph[i] = std::polar(1.0, -ev[i] * dt_step);
    u_ = es_.eigenvectors() * ph.asDiagonal() * es_.eigenvectors().adjoint() * u_;
  }

  const Cluster& cluster_;
  int dim_;
  MatrixXcd h_static_;
  MatrixXcd u_;
  MatrixXcd scratch_;
  std::vector<VectorXd> sz_diag_;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es_;
};

void run_parallel(int n_items, int threads, const std::function<void(int)>& work) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n_items));
  if (threads == 1) {
    for (int i = 0; i < n_items; ++i) work(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n_items; i += threads) work(i);
    });
  }
  for (auto& th : pool) th.join();
}

Cluster make_realization(const ClusterTemplate& tpl, std::uint64_t master_seed,
                         int realization, double duration) {
  Cluster c;
  c.n_spins = tpl.n_spins;
  c.drive = 0.0;
  c.flip_flop = tpl.flip_flop;

  const int n_bath = tpl.n_spins - 1;
  SpinEnsemble ens;
  ens.quantization_axis_tilt = tpl.axis_tilt;
  if (!tpl.fixed_positions.empty()) {
    ens.positions = tpl.fixed_positions;
    ens.density = tpl.density;
    ens.min_radius = tpl.min_radius;
  } else if (n_bath > 0) {
    ens = sample_ensemble(tpl.density, n_bath, tpl.min_radius,
                          derive_seed(master_seed, 2ull * realization));
    ens.quantization_axis_tilt = tpl.axis_tilt;
  }
  c.couplings = ensemble_couplings(ens, tpl.constants);

  if (tpl.noise.w > 0.0) {
    c.onsite.reserve(tpl.n_spins);
    for (int i = 0; i < tpl.n_spins; ++i) {
      const auto s = derive_seed(master_seed, 2ull * realization + 1) + i;
      c.onsite.push_back(generate_trajectory(tpl.noise, tpl.dt, duration, splitmix64(s)));
    }
  }
  return c;
}

CorrelationResult average_realizations(
    const ClusterTemplate& tpl, std::span<const double> t_grid, int n_realizations,
    std::uint64_t seed, int threads,
    const std::function<void(const Cluster&, std::span<const double>, double*)>& run_one) {
  tpl.validate();
  if (n_realizations < 1) throw ConfigError("n_realizations must be >= 1");
  if (t_grid.empty()) throw ConfigError("empty time grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < 0.0 || (i > 0 && t_grid[i] <= t_grid[i - 1])) {
      throw ConfigError("time grid must be non-negative and strictly increasing");
    }
  }
  const double duration = t_grid.back();
  const std::size_t nt = t_grid.size();
  std::vector<double> vals(static_cast<std::size_t>(n_realizations) * nt);

  run_parallel(n_realizations, threads, [&](int k) {
    const Cluster c = make_realization(tpl, seed, k, duration);
    run_one(c, t_grid, &vals[static_cast<std::size_t>(k) * nt]);
  });

  CorrelationResult res;
  res.times.assign(t_grid.begin(), t_grid.end());
  res.n_disorder = n_realizations;
  res.correlation.resize(nt);
  res.std_error.resize(nt);
  for (std::size_t j = 0; j < nt; ++j) {
    double mean = 0.0;
    for (int k = 0; k < n_realizations; ++k) mean += vals[k * nt + j];
    mean /= n_realizations;
    double var = 0.0;
    for (int k = 0; k < n_realizations; ++k) {
      const double d = vals[k * nt + j] - mean;
      var += d * d;
    }
    res.correlation[j] = mean;
    res.std_error[j] =
        n_realizations > 1 ? std::sqrt(var / (n_realizations * (n_realizations - 1.0))) : 0.0;
  }
  return res;
}

}  // namespace

void ClusterTemplate::validate() const {
  if (n_spins < 1) throw ConfigError("ClusterTemplate: n_spins must be >= 1");
  if (n_spins > max_spins) {
    throw ConfigError("ClusterTemplate: n_spins " + std::to_string(n_spins) +
                      " exceeds capacity " + std::to_string(max_spins));
  }
  if (!fixed_positions.empty() &&
      static_cast<int>(fixed_positions.size()) != n_spins - 1) {
    throw ConfigError("ClusterTemplate: fixed_positions must have n_spins-1 entries");
  }
  if (fixed_positions.empty() && n_spins > 1 && !(density > 0.0)) {
    throw ConfigError("ClusterTemplate: density must be > 0");
  }
  if (!(dt > 0.0)) throw ConfigError("ClusterTemplate: dt must be > 0");
  noise.validate();
}

Eigen::MatrixXcd propagate(const Cluster& c, double t) {
  if (t < 0.0) throw std::domain_error("propagate: t must be >= 0");
  Evolver ev(c);
  ev.evolve(0.0, t);
  return ev.unitary();
}

CorrelationResult sz_autocorrelation(const ClusterTemplate& tpl,
                                     std::span<const double> t_grid,
                                     int n_realizations, std::uint64_t seed, int threads) {
  ClusterTemplate t = tpl;
  return average_realizations(
      t, t_grid, n_realizations, seed, threads,
      [](const Cluster& c, std::span<const double> grid, double* out) {
        Evolver ev(c);
        const auto obs = spin_observable(1 << c.n_spins, 0, 'z');
        double prev = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
          ev.evolve(prev, grid[i]);
          prev = grid[i];
          out[i] = infinite_temp_corr(ev.unitary(), obs);
        }
      });
}

CorrelationResult spin_lock_decay(const ClusterTemplate& tpl, double omega,
                                  std::span<const double> t_grid, int n_realizations,
                                  std::uint64_t seed, int threads) {
  if (omega < 0.0) throw ConfigError("spin_lock_decay: omega must be >= 0");
  return average_realizations(
      tpl, t_grid, n_realizations, seed, threads,
      [omega](const Cluster& c, std::span<const double> grid, double* out) {
        Cluster driven = c;
        driven.drive = omega;
        Evolver ev(driven);
        const auto obs = spin_observable(1 << c.n_spins, 0, 'y');
        double prev = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
          ev.evolve(prev, grid[i]);
          prev = grid[i];
          out[i] = infinite_temp_corr(ev.unitary(), obs);
        }
      });
}

std::vector<Pulse> sequence_pulses(SequenceKind kind, double t) {
  std::vector<Pulse> pulses;
  switch (kind) {
    case SequenceKind::Ramsey:
      break;
    case SequenceKind::Echo:
      pulses.push_back({t / 2.0, 'x', kPi});
      break;
    case SequenceKind::XY4:
      pulses.push_back({1.0 * t / 8.0, 'x', kPi});
      pulses.push_back({3.0 * t / 8.0, 'y', kPi});
      pulses.push_back({5.0 * t / 8.0, 'x', kPi});
      pulses.push_back({7.0 * t / 8.0, 'y', kPi});
      break;
    case SequenceKind::MREV8InEcho: {
      // two 12-interval MREV-8 cycles around a central pi; base interval t/24
      const double tb = t / 24.0;
      const double half = kPi / 2.0;
      const auto cycle = [&](double off) {
        pulses.push_back({off + 1.0 * tb, 'x', -half});
        pulses.push_back({off + 2.0 * tb, 'y', half});
        pulses.push_back({off + 4.0 * tb, 'y', -half});
        pulses.push_back({off + 5.0 * tb, 'x', half});
        pulses.push_back({off + 7.0 * tb, 'x', half});
        pulses.push_back({off + 8.0 * tb, 'y', half});
        pulses.push_back({off + 10.0 * tb, 'y', -half});
        pulses.push_back({off + 11.0 * tb, 'x', -half});
      };
      cycle(0.0);
      pulses.push_back({t / 2.0, 'x', kPi});
      cycle(t / 2.0);
      break;
    }
    default:
      throw std::invalid_argument(std::string("sequence_pulses: unsupported kind ") +
                                  to_string(kind));
  }
  return pulses;
}

CorrelationResult sequence_response(const ClusterTemplate& tpl, const PulseSequence& seq,
                                    std::span<const double> t_grid, int n_realizations,
                                    std::uint64_t seed, int threads) {
  seq.validate();
  if (seq.kind != SequenceKind::Ramsey && seq.kind != SequenceKind::Echo &&
      seq.kind != SequenceKind::XY4 && seq.kind != SequenceKind::MREV8InEcho) {
    throw ConfigError(std::string("sequence_response: unsupported kind ") +
                      to_string(seq.kind));
  }
  const SequenceKind kind = seq.kind;
  return average_realizations(
      tpl, t_grid, n_realizations, seed, threads,
      [kind](const Cluster& c, std::span<const double> grid, double* out) {
        Evolver ev(c);
        const auto obs = spin_observable(1 << c.n_spins, 0, 'x');
        for (std::size_t i = 0; i < grid.size(); ++i) {
          const double t = grid[i];
          ev.reset();
          double prev = 0.0;
          for (const Pulse& p : sequence_pulses(kind, t)) {
            ev.evolve(prev, p.time);
            ev.apply_pulse(p.axis, p.angle);
            prev = p.time;
          }
          ev.evolve(prev, t);
          out[i] = infinite_temp_corr(ev.unitary(), obs);
        }
      });
}

}  // namespace spindyn
